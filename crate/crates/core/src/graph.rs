//! Similarity-graph construction: the data-similarity graph (k-nearest
//! neighbors with heat-kernel weights), the fairness graphs (equivalence-class
//! cliques and between-group quantile links), and graph Laplacians.

use crate::{Error, Result, Scalar};
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::hash::Hash;

/// Dense graphs only; beyond this order the quadratic storage stops being
/// reasonable on a workstation.
pub const MAX_GRAPH_ORDER: usize = 5000;

/// What a graph encodes, carried along for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphRole {
    DataSimilarity,
    Fairness,
}

/// Symmetric nonnegative weighted adjacency over record indices with a zero
/// diagonal.
#[derive(Debug, Clone)]
pub struct SimilarityGraph<F: Scalar> {
    weights: Array2<F>,
    role: GraphRole,
}

impl<F: Scalar> SimilarityGraph<F> {
    pub fn new(weights: Array2<F>, role: GraphRole) -> Result<Self> {
        let (r, c) = weights.dim();
        if r != c {
            return Err(Error::Dimension(format!("adjacency is {}x{}, expected square", r, c)));
        }
        if r > MAX_GRAPH_ORDER {
            return Err(Error::Parameter(format!(
                "graph order {} exceeds dense cap {}",
                r, MAX_GRAPH_ORDER
            )));
        }
        for i in 0..r {
            if weights[[i, i]] != F::zero() {
                return Err(Error::Input(format!("nonzero diagonal at {}", i)));
            }
            for j in 0..r {
                let w = weights[[i, j]];
                if !w.is_finite() || w < F::zero() {
                    return Err(Error::Input(format!("invalid weight at ({}, {})", i, j)));
                }
                if w != weights[[j, i]] {
                    return Err(Error::Input(format!("asymmetric weight at ({}, {})", i, j)));
                }
            }
        }
        Ok(Self { weights, role })
    }

    pub fn size(&self) -> usize {
        self.weights.nrows()
    }

    pub fn role(&self) -> GraphRole {
        self.role
    }

    pub fn weights(&self) -> ArrayView2<'_, F> {
        self.weights.view()
    }

    pub fn total_weight(&self) -> F {
        self.weights.iter().copied().sum()
    }

    pub fn is_empty_graph(&self) -> bool {
        self.total_weight() == F::zero()
    }

    /// Number of undirected edges with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.size();
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[[i, j]] > F::zero() {
                    count += 1;
                }
            }
        }
        count
    }

    /// Restrict the graph to the given record indices (induced subgraph).
    pub fn induced_subgraph(&self, indices: &[usize]) -> Result<Self> {
        let k = indices.len();
        let mut w = Array2::zeros((k, k));
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                if i >= self.size() || j >= self.size() {
                    return Err(Error::Dimension("subgraph index out of range".into()));
                }
                w[[a, b]] = self.weights[[i, j]];
            }
        }
        Self::new(w, self.role)
    }

    /// Cap the number of incident edges per node by uniform sampling, used to
    /// bound the density of quantile graphs. Deterministic under `seed`.
    pub fn with_edge_cap(&self, cap: usize, seed: u64) -> Result<Self> {
        let n = self.size();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut degree = vec![0usize; n];
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[[i, j]] > F::zero() {
                    edges.push((i, j));
                }
            }
        }
        edges.shuffle(&mut rng);
        let mut w = Array2::zeros((n, n));
        for (i, j) in edges {
            if degree[i] < cap && degree[j] < cap {
                w[[i, j]] = self.weights[[i, j]];
                w[[j, i]] = self.weights[[j, i]];
                degree[i] += 1;
                degree[j] += 1;
            }
        }
        Self::new(w, self.role)
    }
}

/// `L = D - W` with `D` the diagonal degree matrix of row/column sums.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix<F: Scalar> {
    entries: Array2<F>,
}

impl<F: Scalar> LaplacianMatrix<F> {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, F> {
        self.entries.view()
    }

    pub fn into_entries(self) -> Array2<F> {
        self.entries
    }
}

pub fn laplacian<F: Scalar>(graph: &SimilarityGraph<F>) -> LaplacianMatrix<F> {
    let n = graph.size();
    let w = graph.weights();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        let mut degree = F::zero();
        for j in 0..n {
            degree += w[[i, j]];
            l[[i, j]] = -w[[i, j]];
        }
        l[[i, i]] = degree;
    }
    LaplacianMatrix { entries: l }
}

/// k-nearest-neighbor graph with heat-kernel weights
/// `exp(-||x_i - x_j||^2 / t)`. An edge exists when either endpoint is among
/// the `p` nearest neighbors of the other. Distance ties break by lower index.
pub fn knn_heat_graph<F: Scalar>(
    features: ArrayView2<'_, F>,
    p: usize,
    t: F,
) -> Result<SimilarityGraph<F>> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::Parameter("need at least two records".into()));
    }
    if p == 0 || p >= n {
        return Err(Error::Parameter(format!("neighbor count {} must be in 1..{}", p, n)));
    }
    if !(t > F::zero()) {
        return Err(Error::Parameter("heat-kernel scale must be positive".into()));
    }
    let d2 = pairwise_squared_distances(features);
    let neighbor = knn_mask(&d2, p);
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j && (neighbor[[i, j]] || neighbor[[j, i]]) {
                w[[i, j]] = (-d2[[i, j]] / t).exp();
            }
        }
    }
    SimilarityGraph::new(w, GraphRole::DataSimilarity)
}

/// Data-driven default for the heat-kernel scale: mean squared Euclidean
/// distance over the kNN edge set.
pub fn heat_scale_default<F: Scalar>(features: ArrayView2<'_, F>, p: usize) -> Result<F> {
    let n = features.nrows();
    if p == 0 || p >= n {
        return Err(Error::Parameter(format!("neighbor count {} must be in 1..{}", p, n)));
    }
    let d2 = pairwise_squared_distances(features);
    let neighbor = knn_mask(&d2, p);
    let mut sum = F::zero();
    let mut count = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if neighbor[[i, j]] || neighbor[[j, i]] {
                sum += d2[[i, j]];
                count += 1;
            }
        }
    }
    let mean = sum / F::from_f64_c(count as f64);
    if mean > F::zero() {
        Ok(mean)
    } else {
        // all kNN edges at zero distance; any positive scale gives weight 1
        Ok(F::one())
    }
}

fn pairwise_squared_distances<F: Scalar>(features: ArrayView2<'_, F>) -> Array2<F> {
    let n = features.nrows();
    let m = features.ncols();
    let mut d2 = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let mut acc = F::zero();
            for k in 0..m {
                let diff = features[[i, k]] - features[[j, k]];
                acc += diff * diff;
            }
            d2[[i, j]] = acc;
            d2[[j, i]] = acc;
        }
    }
    d2
}

/// `mask[i][j]` is true when `j` is among the `p` nearest neighbors of `i`.
fn knn_mask<F: Scalar>(d2: &Array2<F>, p: usize) -> Array2<bool> {
    let n = d2.nrows();
    let mut mask = Array2::from_elem((n, n), false);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| d2[[i, a]].partial_cmp(&d2[[i, b]]).unwrap().then(a.cmp(&b)));
        for &j in order.iter().take(p) {
            mask[[i, j]] = true;
        }
    }
    mask
}

/// Fairness graph over equivalence classes: unit edge between every pair of
/// labeled records in the same class. Unlabeled records get zero rows; an
/// empty assignment yields the zero graph (callers may warn).
pub fn equivalence_graph<F: Scalar, K: Eq + Hash>(
    assignments: &[Option<K>],
) -> Result<SimilarityGraph<F>> {
    let n = assignments.len();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if let (Some(a), Some(b)) = (&assignments[i], &assignments[j]) {
                if a == b {
                    w[[i, j]] = F::one();
                    w[[j, i]] = F::one();
                }
            }
        }
    }
    SimilarityGraph::new(w, GraphRole::Fairness)
}

/// Per-record group value and quantile index in `1..=k`.
#[derive(Debug, Clone)]
pub struct QuantileAssignment {
    pub groups: Vec<usize>,
    pub quantiles: Vec<usize>,
    pub k: usize,
}

impl QuantileAssignment {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group_count(&self) -> usize {
        let mut seen: Vec<usize> = self.groups.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Within each group independently, sort records ascending by score (ties by
/// record index) and assign quantile `q = ceil(rank * k / n_group)`.
pub fn quantile_assign<F: Scalar>(scores: &[(usize, F)], k: usize) -> Result<QuantileAssignment> {
    if k < 1 {
        return Err(Error::Parameter("quantile count must be at least 1".into()));
    }
    let n = scores.len();
    let mut by_group: HashMap<usize, Vec<usize>> = HashMap::new();
    for (idx, (group, score)) in scores.iter().enumerate() {
        if !score.is_finite() {
            return Err(Error::Input(format!("non-finite score at record {}", idx)));
        }
        by_group.entry(*group).or_default().push(idx);
    }
    let mut quantiles = vec![0usize; n];
    for members in by_group.values() {
        let mut order = members.clone();
        order.sort_by(|&a, &b| scores[a].1.partial_cmp(&scores[b].1).unwrap().then(a.cmp(&b)));
        let n_group = order.len();
        for (pos, &idx) in order.iter().enumerate() {
            let rank = pos + 1;
            quantiles[idx] = (rank * k).div_ceil(n_group);
        }
    }
    Ok(QuantileAssignment {
        groups: scores.iter().map(|(g, _)| *g).collect(),
        quantiles,
        k,
    })
}

/// Multipartite fairness graph linking records of different groups whose
/// within-group scores fall in the same quantile.
pub fn between_group_quantile_graph<F: Scalar>(
    qa: &QuantileAssignment,
) -> Result<SimilarityGraph<F>> {
    if qa.group_count() < 2 {
        return Err(Error::Parameter("between-group graph needs at least two groups".into()));
    }
    let n = qa.len();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if qa.groups[i] != qa.groups[j] && qa.quantiles[i] == qa.quantiles[j] {
                w[[i, j]] = F::one();
                w[[j, i]] = F::one();
            }
        }
    }
    SimilarityGraph::new(w, GraphRole::Fairness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};

    #[test]
    fn identical_records_get_unit_weight() {
        let x = array![[1.0, 2.0], [1.0, 2.0]];
        let g = knn_heat_graph(x.view(), 1, 3.0).unwrap();
        assert_abs_diff_eq!(g.weights()[[0, 1]], 1.0);
    }

    #[test]
    fn collinear_points_or_rule() {
        // points at 0, 1, 10 on a line; 1's nearest is 0, 2's nearest is 1,
        // the OR rule inserts edge (1,2); no (0,2) edge
        let x = array![[0.0], [1.0], [10.0]];
        let g = knn_heat_graph(x.view(), 1, 1.0).unwrap();
        let w = g.weights();
        assert_abs_diff_eq!(w[[0, 1]], (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(w[[1, 2]], (-81.0f64).exp(), epsilon = 1e-15);
        assert_eq!(w[[0, 2]], 0.0);
    }

    #[test]
    fn knn_matches_brute_force_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let p = 5;
        let x: Array2<f64> = Array2::from_shape_fn((n, 4), |_| rng.gen_range(-1.0..1.0));
        let g = knn_heat_graph(x.view(), p, 1.0).unwrap();
        // brute-force all-pairs kNN
        for i in 0..n {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = (0..4).map(|k| (x[[i, k]] - x[[j, k]]).powi(2)).sum();
                    (d, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let neighbors: Vec<usize> = dists.iter().take(p).map(|&(_, j)| j).collect();
            for &j in &neighbors {
                assert!(g.weights()[[i, j]] > 0.0, "missing edge ({}, {})", i, j);
            }
            let nonzeros = (0..n).filter(|&j| g.weights()[[i, j]] > 0.0).count();
            assert!((p..n).contains(&nonzeros));
        }
    }

    #[test]
    fn p_out_of_range_errors() {
        let x = array![[0.0], [1.0]];
        assert!(knn_heat_graph(x.view(), 2, 1.0).is_err());
    }

    #[test]
    fn equivalence_basic() {
        let assignments = vec![Some(1u32), Some(1), Some(2)];
        let g = equivalence_graph::<f64, _>(&assignments).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_abs_diff_eq!(g.weights()[[0, 1]], 1.0);
    }

    #[test]
    fn equivalence_single_class_is_complete() {
        let n = 7;
        let assignments: Vec<Option<u32>> = vec![Some(0); n];
        let g = equivalence_graph::<f64, _>(&assignments).unwrap();
        assert_eq!(g.edge_count(), n * (n - 1) / 2);
    }

    #[test]
    fn equivalence_cliques_match_count_oracle() {
        // 10 records, 3 distinct classes
        let classes = [0u32, 1, 2, 0, 1, 2, 0, 1, 0, 2];
        let assignments: Vec<Option<u32>> = classes.iter().copied().map(Some).collect();
        let g = equivalence_graph::<f64, _>(&assignments).unwrap();
        let sizes = [4usize, 3, 3]; // class 0, 1, 2
        let expected: usize = sizes.iter().map(|s| s * (s - 1) / 2).sum();
        assert_eq!(g.edge_count(), expected);
    }

    #[test]
    fn empty_assignment_gives_zero_graph() {
        let assignments: Vec<Option<u32>> = vec![None; 4];
        let g = equivalence_graph::<f64, _>(&assignments).unwrap();
        assert!(g.is_empty_graph());
    }

    #[test]
    fn quantile_even_split() {
        let scores: Vec<(usize, f64)> = vec![(0, 1.0), (0, 2.0), (0, 3.0), (0, 4.0)];
        let qa = quantile_assign(&scores, 2).unwrap();
        assert_eq!(qa.quantiles, vec![1, 1, 2, 2]);
    }

    #[test]
    fn quantile_tie_break_by_index() {
        let scores: Vec<(usize, f64)> = vec![(0, 5.0), (0, 5.0), (0, 5.0)];
        let qa = quantile_assign(&scores, 3).unwrap();
        assert_eq!(qa.quantiles, vec![1, 2, 3]);
    }

    #[test]
    fn quantile_deciles_match_sort_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut scores: Vec<(usize, f64)> = Vec::new();
        for g in 0..2usize {
            for _ in 0..10 {
                scores.push((g, rng.gen_range(0.0..100.0)));
            }
        }
        let qa = quantile_assign(&scores, 10).unwrap();
        for g in 0..2usize {
            let mut members: Vec<(f64, usize)> = scores
                .iter()
                .enumerate()
                .filter(|(_, (grp, _))| *grp == g)
                .map(|(i, (_, s))| (*s, i))
                .collect();
            members.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for (pos, &(_, idx)) in members.iter().enumerate() {
                assert_eq!(qa.quantiles[idx], pos + 1, "each record alone in its decile");
            }
        }
    }

    #[test]
    fn between_group_single_edge() {
        let qa = QuantileAssignment { groups: vec![0, 1, 1], quantiles: vec![1, 1, 2], k: 2 };
        let g = between_group_quantile_graph::<f64>(&qa).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.weights()[[0, 1]] > 0.0);
    }

    #[test]
    fn between_group_complete_bipartite() {
        let qa = QuantileAssignment {
            groups: vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
            quantiles: vec![1; 10],
            k: 1,
        };
        let g = between_group_quantile_graph::<f64>(&qa).unwrap();
        assert_eq!(g.edge_count(), 25);
    }

    #[test]
    fn between_group_balanced_deciles_match_enumeration() {
        // two groups of 100, K=10, balanced: 10 quantiles x (10x10) pairs
        let mut groups = Vec::new();
        let mut quantiles = Vec::new();
        for g in 0..2usize {
            for i in 0..100usize {
                groups.push(g);
                quantiles.push(i / 10 + 1);
            }
        }
        let qa = QuantileAssignment { groups: groups.clone(), quantiles: quantiles.clone(), k: 10 };
        let g = between_group_quantile_graph::<f64>(&qa).unwrap();
        assert_eq!(g.edge_count(), 1000);
        // brute-force pair enumeration
        let mut count = 0;
        for i in 0..200 {
            for j in i + 1..200 {
                if groups[i] != groups[j] && quantiles[i] == quantiles[j] {
                    count += 1;
                    assert!(g.weights()[[i, j]] > 0.0);
                }
            }
        }
        assert_eq!(count, 1000);
    }

    #[test]
    fn between_group_never_links_same_group() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let scores: Vec<(usize, f64)> =
            (0..60).map(|i| (i % 3, rng.gen_range(0.0..1.0))).collect();
        let qa = quantile_assign(&scores, 4).unwrap();
        let g = between_group_quantile_graph::<f64>(&qa).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                if qa.groups[i] == qa.groups[j] {
                    assert_eq!(g.weights()[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn single_group_errors() {
        let qa = QuantileAssignment { groups: vec![0, 0], quantiles: vec![1, 2], k: 2 };
        assert!(between_group_quantile_graph::<f64>(&qa).is_err());
    }

    #[test]
    fn laplacian_zero_graph() {
        let g = SimilarityGraph::new(Array2::<f64>::zeros((3, 3)), GraphRole::Fairness).unwrap();
        let l = laplacian(&g);
        assert!(l.entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_single_edge() {
        let w = array![[0.0, 1.0], [1.0, 0.0]];
        let g = SimilarityGraph::new(w, GraphRole::Fairness).unwrap();
        let l = laplacian(&g);
        assert_eq!(l.entries()[[0, 0]], 1.0);
        assert_eq!(l.entries()[[0, 1]], -1.0);
        assert_eq!(l.entries()[[1, 0]], -1.0);
        assert_eq!(l.entries()[[1, 1]], 1.0);
    }

    #[test]
    fn laplacian_quadratic_form_matches_double_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 10;
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    let v: f64 = rng.gen_range(0.1..2.0);
                    w[[i, j]] = v;
                    w[[j, i]] = v;
                }
            }
        }
        let g = SimilarityGraph::new(w.clone(), GraphRole::DataSimilarity).unwrap();
        let l = laplacian(&g);
        // random embedding z: n x 2
        let z: Array2<f64> = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
        let mut double_sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d2: f64 = (0..2).map(|k| (z[[i, k]] - z[[j, k]]).powi(2)).sum();
                double_sum += d2 * w[[i, j]];
            }
        }
        // 2 * Tr(Z^T L Z)
        let mut trace = 0.0;
        for a in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    trace += z[[i, a]] * l.entries()[[i, j]] * z[[j, a]];
                }
            }
        }
        let rel = (double_sum - 2.0 * trace).abs() / double_sum.abs().max(1e-12);
        assert!(rel <= 1e-8, "relative error {}", rel);
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_psd_probe() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 12;
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.3) {
                    let v: f64 = rng.gen_range(0.0..3.0);
                    w[[i, j]] = v;
                    w[[j, i]] = v;
                }
            }
        }
        let g = SimilarityGraph::new(w, GraphRole::DataSimilarity).unwrap();
        let l = laplacian(&g);
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| l.entries()[[i, j]]).sum();
            assert!(row_sum.abs() <= 1e-10);
        }
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += x[i] * l.entries()[[i, j]] * x[j];
                }
            }
            assert!(quad >= -1e-10 * norm2);
        }
    }

    #[test]
    fn edge_cap_limits_degree() {
        let qa = QuantileAssignment {
            groups: vec![0, 0, 0, 1, 1, 1],
            quantiles: vec![1; 6],
            k: 1,
        };
        let g = between_group_quantile_graph::<f64>(&qa).unwrap();
        let capped = g.with_edge_cap(1, 0).unwrap();
        for i in 0..6 {
            let degree = (0..6).filter(|&j| capped.weights()[[i, j]] > 0.0).count();
            assert!(degree <= 1);
        }
    }

    #[test]
    fn heat_scale_default_is_mean_knn_distance() {
        let x = array![[0.0], [1.0], [10.0]];
        let t = heat_scale_default(x.view(), 1).unwrap();
        // kNN edges: (0,1) d2=1, (1,2) d2=81
        assert_abs_diff_eq!(t, 41.0, epsilon = 1e-12);
    }
}
