//! Downstream classifier and evaluation measures: L2-regularized logistic
//! regression trained by full-batch gradient descent, AUC via the
//! Mann-Whitney pair formulation, consistency over similarity graphs, and
//! per-group error/positive-prediction rates with their gaps.

use crate::graph::SimilarityGraph;
use crate::{Error, Result, Scalar};
use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

/// Logistic classifier over a `d`-dimensional representation. Weight layout:
/// `d` feature weights followed by the bias.
#[derive(Debug, Clone)]
pub struct LogisticModel<F: Scalar> {
    pub weights: Array1<F>,
    pub regularization: F,
    pub iterations: usize,
    pub final_loss: F,
}

/// Loss and gradient of the regularized negative log-likelihood. The bias is
/// not penalized. `w` holds the feature weights followed by the bias.
pub fn logistic_loss_grad<F: Scalar>(
    z: ArrayView2<'_, F>,
    y: &[bool],
    w: &Array1<F>,
    reg: F,
) -> (F, Array1<F>) {
    let n = z.nrows();
    let d = z.ncols();
    let n_f = F::from_f64_c(n as f64);
    let mut loss = F::zero();
    let mut grad: Array1<F> = Array1::zeros(d + 1);
    for i in 0..n {
        let mut score = w[d];
        for j in 0..d {
            score += w[j] * z[[i, j]];
        }
        // log(1 + exp(-|s|)) + max(0, ...) form keeps this stable
        let abs = score.abs();
        let log1p_exp = (F::one() + (-abs).exp()).ln();
        let yi = if y[i] { F::one() } else { F::zero() };
        // -[y*s - log(1+exp(s))]
        let log1p_exp_s = if score > F::zero() { score + log1p_exp } else { log1p_exp };
        loss += log1p_exp_s - yi * score;
        let p = sigmoid(score);
        let err = p - yi;
        for j in 0..d {
            grad[j] += err * z[[i, j]];
        }
        grad[d] += err;
    }
    loss /= n_f;
    grad.mapv_inplace(|g| g / n_f);
    for j in 0..d {
        loss += reg * F::from_f64_c(0.5) * w[j] * w[j];
        grad[j] += reg * w[j];
    }
    (loss, grad)
}

fn sigmoid<F: Scalar>(s: F) -> F {
    if s >= F::zero() {
        F::one() / (F::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (F::one() + e)
    }
}

/// Fit by batch gradient descent with backtracking line search; converged
/// when the gradient norm drops to `tol`.
pub fn fit_logreg<F: Scalar>(
    z: ArrayView2<'_, F>,
    y: &[bool],
    reg: F,
    max_iters: usize,
    tol: F,
) -> Result<LogisticModel<F>> {
    let n = z.nrows();
    if n != y.len() {
        return Err(Error::Dimension(format!("{} rows vs {} labels", n, y.len())));
    }
    if n < 2 {
        return Err(Error::Data("need at least two records".into()));
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == n {
        return Err(Error::Data("training labels contain a single class".into()));
    }
    let d = z.ncols();
    let mut w: Array1<F> = Array1::zeros(d + 1);
    let (mut loss, mut grad) = logistic_loss_grad(z, y, &w, reg);
    let armijo = F::from_f64_c(1e-4);
    let mut iterations = 0;
    for _ in 0..max_iters {
        let grad_norm = grad.iter().map(|g| *g * *g).sum::<F>().sqrt();
        if grad_norm <= tol {
            break;
        }
        let grad_sq = grad_norm * grad_norm;
        let mut step = F::one();
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = Array1::from_shape_fn(d + 1, |j| w[j] - step * grad[j]);
            let (cand_loss, cand_grad) = logistic_loss_grad(z, y, &candidate, reg);
            if cand_loss <= loss - armijo * step * grad_sq {
                w = candidate;
                loss = cand_loss;
                grad = cand_grad;
                accepted = true;
                break;
            }
            step *= F::from_f64_c(0.5);
        }
        if !accepted {
            break; // step underflow: at numerical optimum
        }
        iterations += 1;
    }
    Ok(LogisticModel { weights: w, regularization: reg, iterations, final_loss: loss })
}

impl<F: Scalar> LogisticModel<F> {
    pub fn latent_dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn predict_proba(&self, z: ArrayView1<'_, F>) -> Result<F> {
        let d = self.latent_dim();
        if z.len() != d {
            return Err(Error::Dimension(format!("{} features vs model dim {}", z.len(), d)));
        }
        let mut score = self.weights[d];
        for j in 0..d {
            score += self.weights[j] * z[j];
        }
        Ok(sigmoid(score))
    }

    pub fn predict_proba_batch(&self, z: ArrayView2<'_, F>) -> Result<Vec<F>> {
        (0..z.nrows()).map(|i| self.predict_proba(z.row(i))).collect()
    }
}

/// Mann-Whitney AUC: `(concordant + 0.5 * tied) / (positives * negatives)`.
pub fn auc<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension("scores and labels differ in length".into()));
    }
    let pos: Vec<F> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<F> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(s, _)| *s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::UndefinedMetric("AUC needs both classes present".into()));
    }
    let mut numerator = 0.0f64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                numerator += 1.0;
            } else if p == n {
                numerator += 0.5;
            }
        }
    }
    Ok(numerator / (pos.len() as f64 * neg.len() as f64))
}

/// `1 - (sum_ij |yhat_i - yhat_j| W_ij) / (sum_ij W_ij)` over ordered pairs.
/// `yhat` may be binary (0/1) or probability-valued.
pub fn consistency<F: Scalar>(yhat: &[F], graph: &SimilarityGraph<F>) -> Result<f64> {
    let n = graph.size();
    if yhat.len() != n {
        return Err(Error::Dimension(format!("{} predictions vs graph of {}", yhat.len(), n)));
    }
    let w = graph.weights();
    let mut disagreement = F::zero();
    let mut total = F::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let wij = w[[i, j]];
                disagreement += (yhat[i] - yhat[j]).abs() * wij;
                total += wij;
            }
        }
    }
    if total == F::zero() {
        return Err(Error::UndefinedMetric("consistency over a zero graph".into()));
    }
    Ok(1.0 - (disagreement / total).to_f64().unwrap())
}

/// Error and positive-prediction rates for one group. Rates with an empty
/// denominator are reported as `None` and excluded from gaps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRates {
    pub group: usize,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub positive_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRatesSummary {
    pub per_group: Vec<GroupRates>,
    /// Maximum pairwise gap over groups with the rate defined.
    pub gap_fpr: Option<f64>,
    pub gap_fnr: Option<f64>,
    pub gap_ppr: Option<f64>,
    /// Set when some per-group rate had an empty denominator.
    pub undefined_rate_warning: bool,
}

fn max_pairwise_gap(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.len() < 2 {
        return None;
    }
    let mut gap = 0.0f64;
    for i in 0..defined.len() {
        for j in i + 1..defined.len() {
            gap = gap.max((defined[i] - defined[j]).abs());
        }
    }
    Some(gap)
}

/// Per-group FPR, FNR and positive-prediction rates with absolute gaps.
pub fn group_rates(yhat: &[bool], y: &[bool], s: &[usize]) -> Result<GroupRatesSummary> {
    if yhat.len() != y.len() || y.len() != s.len() {
        return Err(Error::Dimension("predictions, labels and groups differ in length".into()));
    }
    let mut groups: Vec<usize> = s.to_vec();
    groups.sort_unstable();
    groups.dedup();
    if groups.is_empty() {
        return Err(Error::Data("no records".into()));
    }
    let mut per_group = Vec::new();
    let mut warning = false;
    for &g in &groups {
        let idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] == g).collect();
        let mut fp = 0usize;
        let mut tn = 0usize;
        let mut fnn = 0usize;
        let mut tp = 0usize;
        let mut pos_pred = 0usize;
        for &i in &idx {
            match (yhat[i], y[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                (false, false) => tn += 1,
            }
            if yhat[i] {
                pos_pred += 1;
            }
        }
        let fpr = if fp + tn > 0 { Some(fp as f64 / (fp + tn) as f64) } else { None };
        let fnr = if fnn + tp > 0 { Some(fnn as f64 / (fnn + tp) as f64) } else { None };
        if fpr.is_none() || fnr.is_none() {
            warning = true;
        }
        per_group.push(GroupRates {
            group: g,
            fpr,
            fnr,
            positive_rate: pos_pred as f64 / idx.len() as f64,
        });
    }
    let gap_fpr = max_pairwise_gap(&per_group.iter().map(|r| r.fpr).collect::<Vec<_>>());
    let gap_fnr = max_pairwise_gap(&per_group.iter().map(|r| r.fnr).collect::<Vec<_>>());
    let gap_ppr = max_pairwise_gap(
        &per_group.iter().map(|r| Some(r.positive_rate)).collect::<Vec<_>>(),
    );
    Ok(GroupRatesSummary { per_group, gap_fpr, gap_fnr, gap_ppr, undefined_rate_warning: warning })
}

/// Flat evaluation summary for one classifier on one split. Serializes to a
/// flat JSON object with stable key names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub auc: f64,
    pub consistency_wx: Option<f64>,
    pub consistency_wf: Option<f64>,
    pub fpr_g0: Option<f64>,
    pub fpr_g1: Option<f64>,
    pub fnr_g0: Option<f64>,
    pub fnr_g1: Option<f64>,
    pub ppr_g0: Option<f64>,
    pub ppr_g1: Option<f64>,
    pub gap_fpr: Option<f64>,
    pub gap_fnr: Option<f64>,
    pub gap_ppr: Option<f64>,
}

impl EvaluationReport {
    pub fn from_parts(
        auc: f64,
        consistency_wx: Option<f64>,
        consistency_wf: Option<f64>,
        rates: &GroupRatesSummary,
    ) -> Self {
        let g0 = rates.per_group.first();
        let g1 = rates.per_group.get(1);
        EvaluationReport {
            auc,
            consistency_wx,
            consistency_wf,
            fpr_g0: g0.and_then(|r| r.fpr),
            fpr_g1: g1.and_then(|r| r.fpr),
            fnr_g0: g0.and_then(|r| r.fnr),
            fnr_g1: g1.and_then(|r| r.fnr),
            ppr_g0: g0.map(|r| r.positive_rate),
            ppr_g1: g1.map(|r| r.positive_rate),
            gap_fpr: rates.gap_fpr,
            gap_fnr: rates.gap_fnr,
            gap_ppr: rates.gap_ppr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphRole;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};

    #[test]
    fn separable_two_points() {
        let z = array![[-1.0], [1.0]];
        let y = vec![false, true];
        let model = fit_logreg(z.view(), &y, 1e-4, 5000, 1e-8).unwrap();
        let p0 = model.predict_proba(z.row(0)).unwrap();
        let p1 = model.predict_proba(z.row(1)).unwrap();
        assert!(p0 < 0.5 && p1 > 0.5, "training accuracy 1.0 expected");
    }

    #[test]
    fn shuffled_labels_give_chance_auc() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 2000;
        let z = Array2::from_shape_fn((n, 3), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let train = n / 2;
        let model =
            fit_logreg(z.slice(ndarray::s![..train, ..]), &y[..train], 1e-4, 500, 1e-8).unwrap();
        let held = z.slice(ndarray::s![train.., ..]);
        let probs = model.predict_proba_batch(held).unwrap();
        let a = auc(&probs, &y[train..]).unwrap();
        assert!((a - 0.5).abs() <= 0.05, "AUC {} not near chance", a);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let z: Array2<f64> = Array2::from_shape_fn((10, 3), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<bool> = (0..10).map(|_| rng.gen_bool(0.5)).collect();
        let w: Array1<f64> = Array1::from_shape_fn(4, |_| rng.gen_range(-0.5..0.5));
        let reg = 1e-2;
        let (_, grad) = logistic_loss_grad(z.view(), &y, &w, reg);
        let h = 1e-5;
        for j in 0..4 {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let (lp, _) = logistic_loss_grad(z.view(), &y, &wp, reg);
            let (lm, _) = logistic_loss_grad(z.view(), &y, &wm, reg);
            let fd = (lp - lm) / (2.0 * h);
            assert!((grad[j] - fd).abs() <= 1e-6, "component {}: {} vs {}", j, grad[j], fd);
        }
    }

    #[test]
    fn single_class_errors() {
        let z = array![[0.0], [1.0]];
        assert!(fit_logreg(z.view(), &[true, true], 1e-4, 100, 1e-8).is_err());
    }

    #[test]
    fn proba_symmetry() {
        let model = LogisticModel::<f64> {
            weights: array![0.0, 0.0],
            regularization: 0.0,
            iterations: 0,
            final_loss: 0.0,
        };
        assert_abs_diff_eq!(model.predict_proba(array![0.0].view()).unwrap(), 0.5);

        let model = LogisticModel::<f64> {
            weights: array![0.7, -0.2, 0.0],
            regularization: 0.0,
            iterations: 0,
            final_loss: 0.0,
        };
        let z = array![0.3, 1.1];
        let p = model.predict_proba(z.view()).unwrap();
        let neg = LogisticModel::<f64> {
            weights: array![-0.7, 0.2, 0.0],
            regularization: 0.0,
            iterations: 0,
            final_loss: 0.0,
        };
        let zn = array![-0.3, -1.1];
        let pn = neg.predict_proba(zn.view()).unwrap();
        assert_abs_diff_eq!(p, pn, epsilon = 1e-15);
    }

    #[test]
    fn proba_matches_independent_sigmoid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let model = LogisticModel::<f64> {
            weights: array![0.4, -1.2, 0.3],
            regularization: 0.0,
            iterations: 0,
            final_loss: 0.0,
        };
        for _ in 0..100 {
            let z = array![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let p = model.predict_proba(z.view()).unwrap();
            // independently coded sigmoid
            let s = 0.4 * z[0] - 1.2 * z[1] + 0.3;
            let oracle = 1.0 / (1.0 + (-s as f64).exp());
            assert!((p - oracle).abs() <= 1e-12);
        }
    }

    #[test]
    fn auc_perfect_and_tied() {
        let labels = vec![false, false, true, true];
        assert_abs_diff_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_abs_diff_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(), 0.5);
    }

    #[test]
    fn auc_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let n = 200;
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let a = auc(&scores, &labels).unwrap();
        // brute-force enumeration over all pos x neg pairs
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            if !labels[i] {
                continue;
            }
            for j in 0..n {
                if labels[j] {
                    continue;
                }
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
        assert_eq!(a, num / den);
    }

    #[test]
    fn auc_single_class_errors() {
        assert!(auc(&[0.1, 0.9], &[true, true]).is_err());
    }

    #[test]
    fn auc_monotone_transform_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let scores: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let labels: Vec<bool> = (0..50).map(|_| rng.gen_bool(0.5)).collect();
        let base = auc(&scores, &labels).unwrap();
        let exp_scores: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        let affine: Vec<f64> = scores.iter().map(|s| 3.0 * s + 7.0).collect();
        assert_eq!(auc(&exp_scores, &labels).unwrap(), base);
        assert_eq!(auc(&affine, &labels).unwrap(), base);
    }

    #[test]
    fn consistency_constant_and_maximal_disagreement() {
        let w = array![[0.0, 1.0], [1.0, 0.0]];
        let g = SimilarityGraph::new(w, GraphRole::Fairness).unwrap();
        assert_abs_diff_eq!(consistency(&[1.0, 1.0], &g).unwrap(), 1.0);
        assert_abs_diff_eq!(consistency(&[1.0, 0.0], &g).unwrap(), 0.0);
    }

    #[test]
    fn consistency_matches_double_loop_and_scale_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let n = 20;
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    let v: f64 = rng.gen_range(0.1..2.0);
                    w[[i, j]] = v;
                    w[[j, i]] = v;
                }
            }
        }
        let yhat: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let g = SimilarityGraph::new(w.clone(), GraphRole::Fairness).unwrap();
        let c = consistency(&yhat, &g).unwrap();
        let mut dis = 0.0;
        let mut tot = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dis += (yhat[i] - yhat[j]).abs() * w[[i, j]];
                    tot += w[[i, j]];
                }
            }
        }
        assert!((c - (1.0 - dis / tot)).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&c));
        let scaled = SimilarityGraph::new(w.mapv(|v| v * 3.5), GraphRole::Fairness).unwrap();
        let cs = consistency(&yhat, &scaled).unwrap();
        assert!((c - cs).abs() <= 1e-12);
    }

    #[test]
    fn consistency_zero_graph_errors() {
        let g = SimilarityGraph::new(Array2::<f64>::zeros((2, 2)), GraphRole::Fairness).unwrap();
        assert!(consistency(&[1.0, 0.0], &g).is_err());
    }

    #[test]
    fn group_rates_perfect_classifier() {
        let y = vec![true, false, true, false];
        let s = vec![0, 0, 1, 1];
        let summary = group_rates(&y, &y, &s).unwrap();
        for g in &summary.per_group {
            assert_eq!(g.fpr, Some(0.0));
            assert_eq!(g.fnr, Some(0.0));
        }
        assert_eq!(summary.gap_fpr, Some(0.0));
        assert_eq!(summary.gap_fnr, Some(0.0));
    }

    #[test]
    fn group_rates_constant_positive_classifier() {
        let yhat = vec![true; 6];
        let y = vec![true, false, true, true, false, false];
        let s = vec![0, 0, 0, 1, 1, 1];
        let summary = group_rates(&yhat, &y, &s).unwrap();
        for g in &summary.per_group {
            assert_abs_diff_eq!(g.positive_rate, 1.0);
            assert_eq!(g.fpr, Some(1.0));
        }
        assert_eq!(summary.gap_ppr, Some(0.0));
    }

    #[test]
    fn group_rates_hand_tally() {
        // 12-record crafted example, counts tallied by hand:
        // group 0: tp=2 fp=1 fn=1 tn=2 -> fpr=1/3, fnr=1/3, ppr=3/6
        // group 1: tp=1 fp=2 fn=1 tn=2 -> fpr=1/2, fnr=1/2, ppr=3/6
        let yhat = vec![
            true, true, false, true, false, false, // group 0
            true, true, true, false, false, false, // group 1
        ];
        let y = vec![
            true, true, true, false, false, false, // group 0
            true, false, false, false, false, true, // group 1
        ];
        let s = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let summary = group_rates(&yhat, &y, &s).unwrap();
        let g0 = &summary.per_group[0];
        let g1 = &summary.per_group[1];
        assert_abs_diff_eq!(g0.fpr.unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g0.fnr.unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g0.positive_rate, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g1.fpr.unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g1.fnr.unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g1.positive_rate, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn group_rates_symmetric_in_relabeling() {
        let yhat = vec![true, false, true, false, true];
        let y = vec![true, true, false, false, true];
        let s = vec![0, 1, 0, 1, 1];
        let swapped: Vec<usize> = s.iter().map(|&g| 1 - g).collect();
        let a = group_rates(&yhat, &y, &s).unwrap();
        let b = group_rates(&yhat, &y, &swapped).unwrap();
        assert_eq!(a.gap_fpr, b.gap_fpr);
        assert_eq!(a.gap_fnr, b.gap_fnr);
        assert_eq!(a.gap_ppr, b.gap_ppr);
    }

    #[test]
    fn group_rates_undefined_denominator_flagged() {
        // group 1 has no negatives: FPR undefined there
        let yhat = vec![true, false, true, true];
        let y = vec![true, false, true, true];
        let s = vec![0, 0, 1, 1];
        let summary = group_rates(&yhat, &y, &s).unwrap();
        assert!(summary.undefined_rate_warning);
        assert_eq!(summary.per_group[1].fpr, None);
        assert_eq!(summary.gap_fpr, None);
    }

    #[test]
    fn training_loss_non_increasing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let z: Array2<f64> = Array2::from_shape_fn((40, 2), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<bool> = (0..40).map(|i| z[[i, 0]] + 0.3 * rng.gen_range(-1.0..1.0) > 0.0).collect();
        let model = fit_logreg(z.view(), &y, 1e-4, 200, 1e-10).unwrap();
        let (initial, _) = logistic_loss_grad(z.view(), &y, &Array1::zeros(3), 1e-4);
        assert!(model.final_loss <= initial);
        assert!(model.weights.iter().all(|w| w.is_finite()));
    }
}
