//! Dense symmetric linear algebra: smallest-eigenpair extraction with
//! deterministic output conventions.
//!
//! The solver is a cyclic Jacobi iteration. It is O(n^3), unconditionally
//! convergent for real symmetric matrices and bitwise deterministic, which is
//! what the rest of the crate relies on for reproducible fits.

use crate::{Error, Result, Scalar};
use ndarray::{Array1, Array2};

/// Dense symmetric matrix. Construction symmetrizes the input as
/// `(A + A^T) / 2` to absorb floating-point asymmetry left over from
/// matrix products.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix<F: Scalar> {
    entries: Array2<F>,
}

impl<F: Scalar> SymmetricMatrix<F> {
    pub fn new(a: Array2<F>) -> Result<Self> {
        let (r, c) = a.dim();
        if r != c {
            return Err(Error::Dimension(format!("matrix is {}x{}, expected square", r, c)));
        }
        if r == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let half = F::from_f64_c(0.5);
        let sym = Array2::from_shape_fn((r, r), |(i, j)| (a[[i, j]] + a[[j, i]]) * half);
        Ok(Self { entries: sym })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<F> {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> F {
        self.entries.iter().map(|v| *v * *v).sum::<F>().sqrt()
    }

    pub fn trace(&self) -> F {
        (0..self.order()).map(|i| self.entries[[i, i]]).sum()
    }
}

/// The `d` algebraically smallest eigenvalues of a symmetric matrix together
/// with an orthonormal set of eigenvectors (one column per value, values
/// ascending).
#[derive(Debug, Clone)]
pub struct EigenPairs<F: Scalar> {
    pub values: Array1<F>,
    pub vectors: Array2<F>,
}

/// Extract the `d` smallest eigenpairs of `a`.
///
/// Sign convention: in each eigenvector the entry of largest absolute value is
/// positive, ties broken by lowest index. Two calls on identical input produce
/// bitwise-identical output.
pub fn eigh_smallest<F: Scalar>(a: &SymmetricMatrix<F>, d: usize) -> Result<EigenPairs<F>> {
    let n = a.order();
    if d == 0 || d > n {
        return Err(Error::Dimension(format!(
            "requested {} eigenpairs from an order-{} matrix",
            d, n
        )));
    }
    let (values, vectors) = jacobi_eigh(a.entries().clone())?;

    // ascending by value, original column index as tie-break for determinism
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));

    let mut out_values = Array1::zeros(d);
    let mut out_vectors = Array2::zeros((n, d));
    for (k, &col) in order.iter().take(d).enumerate() {
        out_values[k] = values[col];
        let mut max_abs = F::zero();
        let mut max_idx = 0usize;
        for i in 0..n {
            let av = vectors[[i, col]].abs();
            if av > max_abs {
                max_abs = av;
                max_idx = i;
            }
        }
        let flip = vectors[[max_idx, col]] < F::zero();
        for i in 0..n {
            let v = vectors[[i, col]];
            out_vectors[[i, k]] = if flip { -v } else { v };
        }
    }
    Ok(EigenPairs { values: out_values, vectors: out_vectors })
}

/// Cyclic Jacobi diagonalization. Returns unsorted eigenvalues and the
/// accumulated rotation matrix whose columns are the eigenvectors.
fn jacobi_eigh<F: Scalar>(mut a: Array2<F>) -> Result<(Array1<F>, Array2<F>)> {
    let n = a.nrows();
    let fro = a.iter().map(|v| *v * *v).sum::<F>().sqrt();
    let threshold = F::from_f64_c(1e-12) * fro;
    let max_sweeps = 100;

    let mut v: Array2<F> = Array2::eye(n);
    if n == 1 {
        return Ok((Array1::from_elem(1, a[[0, 0]]), v));
    }

    for _ in 0..max_sweeps {
        let mut off = F::zero();
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a[[p, q]].abs();
            }
        }
        if off <= threshold {
            let diag = Array1::from_shape_fn(n, |i| a[[i, i]]);
            return Ok((diag, v));
        }

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == F::zero() {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (F::from_f64_c(2.0) * apq);
                // smaller-magnitude root of t^2 + 2 t theta - 1 = 0
                let t = {
                    let sign = if theta >= F::zero() { F::one() } else { -F::one() };
                    sign / (theta.abs() + (F::one() + theta * theta).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi iteration did not converge within 100 sweeps".into()))
}
