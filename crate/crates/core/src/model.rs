//! Fitting the pairwise-fair projection. The combined objective (preserve
//! input-space neighborhoods, pull fairness-linked records together, weighted
//! by `gamma`) reduces to a symmetric eigenproblem: the basis columns are the
//! eigenvectors of the `d` smallest eigenvalues of
//! `X_m ((1 - gamma) L_X + gamma L_F) X_m^T`, where `X_m` is the
//! column-records matrix.
//!
//! Storage orientation: records are stored row-major (`n x m`); the math above
//! uses column-records (`m x n`). The transposition happens once at the math
//! boundary, so the reduced matrix is computed as `X^T L X` on row-major `X`.

use crate::data::StandardizationParams;
use crate::graph::{laplacian, LaplacianMatrix, SimilarityGraph};
use crate::linalg::{eigh_smallest, SymmetricMatrix};
use crate::{Error, Result, Scalar};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Learned orthonormal projection basis plus the hyper-parameters and losses
/// recorded at fit time.
#[derive(Debug, Clone)]
pub struct PfrModel<F: Scalar> {
    /// `m x d`, columns orthonormal.
    pub basis: Array2<F>,
    pub gamma: F,
    pub latent_dim: usize,
    pub eigenvalues: Array1<F>,
    /// Neighborhood-preservation loss of the training embedding.
    pub loss_x: F,
    /// Fairness-graph loss of the training embedding.
    pub loss_f: F,
    /// Set when the retained spectrum is entirely (numerically) zero.
    pub degenerate_spectrum: bool,
    pub standardization: Option<StandardizationParams>,
}

fn check_fit_inputs<F: Scalar>(
    x: ArrayView2<'_, F>,
    wx: &SimilarityGraph<F>,
    wf: &SimilarityGraph<F>,
    gamma: F,
) -> Result<()> {
    let n = x.nrows();
    if wx.size() != n || wf.size() != n {
        return Err(Error::Dimension(format!(
            "graphs over {} and {} records, features over {}",
            wx.size(),
            wf.size(),
            n
        )));
    }
    if !(F::zero()..=F::one()).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {} outside [0, 1]", gamma)));
    }
    if gamma == F::one() && wf.is_empty_graph() {
        return Err(Error::Parameter(
            "gamma = 1 with an empty fairness graph makes the objective degenerate".into(),
        ));
    }
    Ok(())
}

fn mixed_laplacian<F: Scalar>(
    wx: &SimilarityGraph<F>,
    wf: &SimilarityGraph<F>,
    gamma: F,
) -> Array2<F> {
    let lx = laplacian(wx);
    let lf = laplacian(wf);
    let one_minus = F::one() - gamma;
    let mut l = lx.into_entries();
    l.mapv_inplace(|v| v * one_minus);
    l.zip_mut_with(&lf.entries(), |a, &b| *a += gamma * b);
    l
}

/// `X^T L X` for row-major `X` (records as rows).
fn reduced_matrix<F: Scalar>(x: ArrayView2<'_, F>, l: &Array2<F>) -> Array2<F> {
    let lx = l.dot(&x); // n x m
    x.t().dot(&lx) // m x m
}

/// `2 * Tr(Z^T L Z)` with `Z = X V`: the weighted pairwise squared-distance
/// sum of the embedding over the graph behind `L`.
fn embedding_loss<F: Scalar>(z: &Array2<F>, l: &LaplacianMatrix<F>) -> F {
    let lz = l.entries().dot(z);
    let two = F::from_f64_c(2.0);
    two * z
        .iter()
        .zip(lz.iter())
        .map(|(a, b)| *a * *b)
        .sum::<F>()
}

/// Fit the linear projection. `x` is the standardized `n x m` training
/// matrix; `d` latent dimensions are retained.
pub fn fit_linear<F: Scalar>(
    x: ArrayView2<'_, F>,
    wx: &SimilarityGraph<F>,
    wf: &SimilarityGraph<F>,
    gamma: F,
    d: usize,
) -> Result<PfrModel<F>> {
    let m = x.ncols();
    if d == 0 || d > m {
        return Err(Error::Dimension(format!("latent dim {} outside 1..={}", d, m)));
    }
    check_fit_inputs(x, wx, wf, gamma)?;

    let l_mixed = mixed_laplacian(wx, wf, gamma);
    let reduced = SymmetricMatrix::new(reduced_matrix(x, &l_mixed))?;
    let pairs = eigh_smallest(&reduced, d)?;

    let z = x.dot(&pairs.vectors);
    let loss_x = embedding_loss(&z, &laplacian(wx));
    let loss_f = embedding_loss(&z, &laplacian(wf));
    let spectrum_scale = F::from_f64_c(1e-10) * (F::one() + reduced.frobenius_norm());
    let degenerate = pairs.values.iter().all(|v| v.abs() <= spectrum_scale);

    Ok(PfrModel {
        basis: pairs.vectors,
        gamma,
        latent_dim: d,
        eigenvalues: pairs.values,
        loss_x,
        loss_f,
        degenerate_spectrum: degenerate,
        standardization: None,
    })
}

impl<F: Scalar> PfrModel<F> {
    pub fn feature_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `z = V^T x` for a single (standardized) record.
    pub fn transform(&self, x: ArrayView1<'_, F>) -> Result<Array1<F>> {
        if x.len() != self.feature_dim() {
            return Err(Error::Dimension(format!(
                "record has {} features, basis expects {}",
                x.len(),
                self.feature_dim()
            )));
        }
        Ok(self.basis.t().dot(&x))
    }

    /// Batch transform of row-major records.
    pub fn transform_batch(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        if x.ncols() != self.feature_dim() {
            return Err(Error::Dimension(format!(
                "records have {} features, basis expects {}",
                x.ncols(),
                self.feature_dim()
            )));
        }
        Ok(x.dot(&self.basis))
    }
}

/// Kernel family for the non-linear variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelDescriptor {
    /// `k(x, y) = exp(-||x - y||^2 / bandwidth2)`
    Rbf { bandwidth2: f64 },
    /// `k(x, y) = x . y`
    Linear,
}

impl KernelDescriptor {
    fn evaluate<F: Scalar>(&self, a: ArrayView1<'_, F>, b: ArrayView1<'_, F>) -> F {
        match self {
            KernelDescriptor::Rbf { bandwidth2 } => {
                let mut d2 = F::zero();
                for (x, y) in a.iter().zip(b.iter()) {
                    let diff = *x - *y;
                    d2 += diff * diff;
                }
                (-d2 / F::from_f64_c(*bandwidth2)).exp()
            }
            KernelDescriptor::Linear => {
                let mut dot = F::zero();
                for (x, y) in a.iter().zip(b.iter()) {
                    dot += *x * *y;
                }
                dot
            }
        }
    }
}

/// Default RBF bandwidth: median squared pairwise distance of the training
/// records.
pub fn median_squared_distance<F: Scalar>(x: ArrayView2<'_, F>) -> F {
    let n = x.nrows();
    let mut d2: Vec<F> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut acc = F::zero();
            for k in 0..x.ncols() {
                let diff = x[[i, k]] - x[[j, k]];
                acc += diff * diff;
            }
            d2.push(acc);
        }
    }
    if d2.is_empty() {
        return F::one();
    }
    d2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = d2.len() / 2;
    let median = if d2.len() % 2 == 1 {
        d2[mid]
    } else {
        (d2[mid - 1] + d2[mid]) * F::from_f64_c(0.5)
    };
    if median > F::zero() {
        median
    } else {
        F::one()
    }
}

/// Kernelized projection: coefficients over training records instead of a
/// feature-space basis. The implicit feature map is never materialized.
#[derive(Debug, Clone)]
pub struct KernelPfrModel<F: Scalar> {
    /// `n_train x d`.
    pub coefficients: Array2<F>,
    pub kernel: KernelDescriptor,
    /// Stored training records for kernel evaluation at transform time.
    pub train: Array2<F>,
    pub gamma: F,
    pub latent_dim: usize,
    pub eigenvalues: Array1<F>,
    pub standardization: Option<StandardizationParams>,
}

/// Fit the kernel variant: solve `K L K alpha = lambda K alpha` for the `d`
/// smallest eigenpairs over the range of the Gram matrix `K`. The `K` on the
/// right-hand side is the metric induced by unit-norm directions in the
/// implicit feature space; solving against it is what makes the linear kernel
/// reproduce the explicit linear fit.
///
/// Solved by whitening: with `K = U S U^T` restricted to eigenvalues above a
/// rank cutoff, the reduced symmetric problem is
/// `S^{1/2} U^T L U S^{1/2} b = lambda b` and `alpha = U S^{-1/2} b`.
pub fn fit_kernel<F: Scalar>(
    x: ArrayView2<'_, F>,
    wx: &SimilarityGraph<F>,
    wf: &SimilarityGraph<F>,
    gamma: F,
    d: usize,
    kernel: KernelDescriptor,
) -> Result<KernelPfrModel<F>> {
    let n = x.nrows();
    if d == 0 || d > n {
        return Err(Error::Dimension(format!("latent dim {} outside 1..={}", d, n)));
    }
    check_fit_inputs(x, wx, wf, gamma)?;

    let mut gram = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let k = kernel.evaluate(x.row(i), x.row(j));
            gram[[i, j]] = k;
            gram[[j, i]] = k;
        }
    }
    let gram_sym = SymmetricMatrix::new(gram)?;
    let gram_pairs = eigh_smallest(&gram_sym, n)?;
    let psd_tol = F::from_f64_c(1e-8) * gram_sym.frobenius_norm();
    if gram_pairs.values[0] < -psd_tol {
        return Err(Error::Numerical(format!(
            "Gram matrix is not positive semidefinite (eigenvalue {})",
            gram_pairs.values[0]
        )));
    }
    // numerical rank of K: keep directions that carry kernel mass
    let rank_tol = F::from_f64_c(1e-10) * (F::one() + gram_sym.frobenius_norm());
    let kept: Vec<usize> =
        (0..n).filter(|&i| gram_pairs.values[i] > rank_tol).collect();
    let r = kept.len();
    if d > r {
        return Err(Error::Numerical(format!(
            "latent dim {} exceeds the Gram matrix numerical rank {}",
            d, r
        )));
    }
    let mut u = Array2::zeros((n, r));
    let mut sqrt_s = Array1::zeros(r);
    for (c, &i) in kept.iter().enumerate() {
        u.column_mut(c).assign(&gram_pairs.vectors.column(i));
        sqrt_s[c] = gram_pairs.values[i].sqrt();
    }

    let l_mixed = mixed_laplacian(wx, wf, gamma);
    // B = U S^{1/2}; reduced problem B^T L B
    let mut b = u.clone();
    for c in 0..r {
        let s = sqrt_s[c];
        b.column_mut(c).mapv_inplace(|v| v * s);
    }
    let reduced = b.t().dot(&l_mixed).dot(&b);
    let pairs = eigh_smallest(&SymmetricMatrix::new(reduced)?, d)?;

    // alpha = U S^{-1/2} b_eig
    let mut scaled = pairs.vectors;
    for c in 0..r {
        let inv = F::one() / sqrt_s[c];
        scaled.row_mut(c).mapv_inplace(|v| v * inv);
    }
    let coefficients = u.dot(&scaled);

    Ok(KernelPfrModel {
        coefficients,
        kernel,
        train: x.to_owned(),
        gamma,
        latent_dim: d,
        eigenvalues: pairs.values,
        standardization: None,
    })
}

impl<F: Scalar> KernelPfrModel<F> {
    pub fn train_size(&self) -> usize {
        self.train.nrows()
    }

    /// `z = A^T k(X_train, x)`.
    pub fn transform(&self, x: ArrayView1<'_, F>) -> Result<Array1<F>> {
        if x.len() != self.train.ncols() {
            return Err(Error::Dimension(format!(
                "record has {} features, training records have {}",
                x.len(),
                self.train.ncols()
            )));
        }
        let k_vec = Array1::from_shape_fn(self.train_size(), |i| {
            self.kernel.evaluate(self.train.row(i), x)
        });
        Ok(self.coefficients.t().dot(&k_vec))
    }

    pub fn transform_batch(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        let mut out = Array2::zeros((x.nrows(), self.latent_dim));
        for i in 0..x.nrows() {
            out.row_mut(i).assign(&self.transform(x.row(i))?);
        }
        Ok(out)
    }
}

// --- persistence (f64) ----------------------------------------------------

const FORMAT_VERSION: u32 = 1;
const ORIENTATION: &str = "rows_are_records";

#[derive(Serialize, Deserialize)]
struct LinearModelFile {
    format_version: u32,
    kind: String,
    orientation: String,
    gamma: f64,
    latent_dim: usize,
    eigenvalues: Vec<f64>,
    /// `m x d`, row-major array of rows.
    basis: Vec<Vec<f64>>,
    loss_x: f64,
    loss_f: f64,
    degenerate_spectrum: bool,
    standardization: Option<StandardizationParams>,
}

#[derive(Serialize, Deserialize)]
struct KernelModelFile {
    format_version: u32,
    kind: String,
    orientation: String,
    gamma: f64,
    latent_dim: usize,
    eigenvalues: Vec<f64>,
    /// `n_train x d`, row-major.
    coefficients: Vec<Vec<f64>>,
    kernel: KernelDescriptor,
    /// `n_train x m`, row-major.
    train: Vec<Vec<f64>>,
    standardization: Option<StandardizationParams>,
}

fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Serialization("ragged matrix rows".into()));
    }
    Ok(Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect())
        .map_err(|e| Error::Serialization(e.to_string()))?)
}

impl PfrModel<f64> {
    pub fn to_json(&self) -> Result<String> {
        let file = LinearModelFile {
            format_version: FORMAT_VERSION,
            kind: "linear".into(),
            orientation: ORIENTATION.into(),
            gamma: self.gamma,
            latent_dim: self.latent_dim,
            eigenvalues: self.eigenvalues.to_vec(),
            basis: to_rows(&self.basis),
            loss_x: self.loss_x,
            loss_f: self.loss_f,
            degenerate_spectrum: self.degenerate_spectrum,
            standardization: self.standardization.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LinearModelFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported format version {}",
                file.format_version
            )));
        }
        if file.kind != "linear" {
            return Err(Error::Serialization(format!("expected linear model, got {}", file.kind)));
        }
        Ok(PfrModel {
            basis: from_rows(file.basis)?,
            gamma: file.gamma,
            latent_dim: file.latent_dim,
            eigenvalues: Array1::from_vec(file.eigenvalues),
            loss_x: file.loss_x,
            loss_f: file.loss_f,
            degenerate_spectrum: file.degenerate_spectrum,
            standardization: file.standardization,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl KernelPfrModel<f64> {
    pub fn to_json(&self) -> Result<String> {
        let file = KernelModelFile {
            format_version: FORMAT_VERSION,
            kind: "kernel".into(),
            orientation: ORIENTATION.into(),
            gamma: self.gamma,
            latent_dim: self.latent_dim,
            eigenvalues: self.eigenvalues.to_vec(),
            coefficients: to_rows(&self.coefficients),
            kernel: self.kernel,
            train: to_rows(&self.train),
            standardization: self.standardization.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KernelModelFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported format version {}",
                file.format_version
            )));
        }
        if file.kind != "kernel" {
            return Err(Error::Serialization(format!("expected kernel model, got {}", file.kind)));
        }
        Ok(KernelPfrModel {
            coefficients: from_rows(file.coefficients)?,
            kernel: file.kernel,
            train: from_rows(file.train)?,
            gamma: file.gamma,
            latent_dim: file.latent_dim,
            eigenvalues: Array1::from_vec(file.eigenvalues),
            standardization: file.standardization,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
