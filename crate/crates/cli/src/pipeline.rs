//! End-to-end pipelines: per-run data preparation, grid-search
//! cross-validation, final evaluation, and the gamma / label-budget sweeps.
//!
//! The contract throughout: the test split never touches standardization
//! fitting, graph construction for training, grid search, or model fitting.
//! `prepare_run` checks the id-disjointness of the splits explicitly.

use crate::config::{
    DatasetSource, ExperimentConfig, FairnessSource, SelectionCriterion,
};
use ndarray::Array2;
use pfr_core::data::{
    align_equivalence, generate_synthetic, load_csv, oracle_fit, ratings_to_equivalence,
    sample_pairs, scores_to_group_rankings, standardize_apply, standardize_fit, Dataset,
    FairnessOracle, StandardizationParams,
};
use pfr_core::downstream::{auc, consistency, fit_logreg, group_rates, EvaluationReport};
use pfr_core::graph::{equivalence_graph, heat_scale_default, knn_heat_graph, GraphRole};
use pfr_core::model::fit_linear;
use pfr_core::{Error, LogisticModel, PfrModel, Result, SimilarityGraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

/// Per-fairness-source label budget override used by the sparsity sweep.
#[derive(Debug, Clone, Copy)]
pub enum BudgetOverride {
    /// Number of judged pairs (oracle source).
    Pairs(usize),
    /// Fraction of labeled records retained (file-backed sources).
    Fraction(f64),
}

/// Everything one seeded run needs, fully prepared from the training split
/// (plus evaluation-only structures over the test split).
pub struct RunData {
    pub train: Dataset,
    pub test: Dataset,
    pub standardization: StandardizationParams,
    pub z_train: Array2<f64>,
    pub z_test: Array2<f64>,
    pub wx_train: SimilarityGraph,
    pub wf_train: SimilarityGraph,
    pub wx_test: SimilarityGraph,
    /// Held-out fairness graph over test records; `None` when the label
    /// source covers no test ids.
    pub wf_test: Option<SimilarityGraph>,
    pub warnings: Vec<String>,
}

pub fn derive_run_seed(seed: u64, run: usize) -> u64 {
    seed ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn load_splits(config: &ExperimentConfig, run_seed: u64) -> Result<(Dataset, Dataset)> {
    match &config.dataset {
        DatasetSource::Synthetic { n_train, n_test, variant } => {
            Ok(generate_synthetic(*n_train, *n_test, run_seed, *variant))
        }
        DatasetSource::Csv { train_path, test_path, schema, train_fraction } => {
            let train = load_csv(train_path, schema)?;
            match test_path {
                Some(p) => Ok((train, load_csv(p, schema)?)),
                None => {
                    let n = train.len();
                    let mut order: Vec<usize> = (0..n).collect();
                    let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ 0x51b7);
                    order.shuffle(&mut rng);
                    let cut = ((n as f64) * train_fraction).round() as usize;
                    if cut < 2 || n - cut < 2 {
                        return Err(Error::Data("split leaves a side with under 2 records".into()));
                    }
                    Ok((train.subset(&order[..cut])?, train.subset(&order[cut..])?))
                }
            }
        }
    }
}

/// Splits must be disjoint by record id; a violation means test data leaked
/// into training-side structures.
fn assert_disjoint_splits(train: &Dataset, test: &Dataset) -> Result<()> {
    let train_ids: HashSet<&str> = train.ids.iter().map(String::as_str).collect();
    for id in &test.ids {
        if train_ids.contains(id.as_str()) {
            return Err(Error::Data(format!("record {:?} appears in both splits", id)));
        }
    }
    Ok(())
}

fn read_ratings_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {}", path.display(), e)))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(e.to_string()))?;
        let id = record.get(0).ok_or_else(|| Error::Data("missing id column".into()))?;
        let raw = record.get(1).ok_or_else(|| Error::Data("missing rating column".into()))?;
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("line {}: unparseable rating {:?}", i + 2, raw)))?;
        out.push((id.to_string(), value));
    }
    Ok(out)
}

fn read_scores_csv(path: &Path) -> Result<Vec<(String, String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {}", path.display(), e)))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(e.to_string()))?;
        let id = record.get(0).ok_or_else(|| Error::Data("missing id column".into()))?;
        let group = record.get(1).ok_or_else(|| Error::Data("missing group column".into()))?;
        let raw = record.get(2).ok_or_else(|| Error::Data("missing score column".into()))?;
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("line {}: unparseable score {:?}", i + 2, raw)))?;
        out.push((id.to_string(), group.to_string(), value));
    }
    Ok(out)
}

/// Retain a deterministic fraction of labeled entries (sorted by id before
/// shuffling so the choice is input-order independent).
fn subsample_labels<T: Clone>(
    labels: &[(String, T)],
    fraction: f64,
    run_seed: u64,
) -> Vec<(String, T)> {
    let mut sorted: Vec<(String, T)> = labels.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ 0x1abe1);
    sorted.shuffle(&mut rng);
    let keep = ((labels.len() as f64) * fraction).ceil() as usize;
    sorted.truncate(keep.min(labels.len()));
    sorted
}

/// Unit-weight graph linking records with equal quantile labels;
/// `between_groups_only` restricts edges to cross-group pairs.
fn quantile_pair_graph(
    labels: &[Option<(usize, usize)>],
    between_groups_only: bool,
) -> Result<SimilarityGraph> {
    let n = labels.len();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if let (Some((gi, qi)), Some((gj, qj))) = (&labels[i], &labels[j]) {
                if qi == qj && (!between_groups_only || gi != gj) {
                    w[[i, j]] = 1.0;
                    w[[j, i]] = 1.0;
                }
            }
        }
    }
    SimilarityGraph::new(w, GraphRole::Fairness)
}

/// Per-id `(group index, quantile)` labels from a scores file.
fn score_labels(
    scores: &[(String, String, f64)],
    k: usize,
) -> Result<Vec<(String, (usize, usize))>> {
    let (ids, _names, qa) = scores_to_group_rankings(scores, k)?;
    Ok(ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, (qa.groups[i], qa.quantiles[i])))
        .collect())
}

struct FairnessLabels {
    oracle: Option<FairnessOracle>,
    /// Unsubsampled labels for held-out evaluation graphs.
    full_equivalence: Option<Vec<(String, u8)>>,
    full_scores: Option<Vec<(String, (usize, usize))>>,
}

fn build_wf_train(
    config: &ExperimentConfig,
    train: &Dataset,
    run_seed: u64,
    budget: Option<BudgetOverride>,
    warnings: &mut Vec<String>,
) -> Result<(SimilarityGraph, FairnessLabels)> {
    match &config.fairness {
        FairnessSource::OraclePairs { k, budget: config_budget } => {
            let pair_budget = match budget {
                Some(BudgetOverride::Pairs(b)) => b,
                Some(BudgetOverride::Fraction(_)) => {
                    return Err(Error::Parameter(
                        "oracle source sweeps pair budgets, not label fractions".into(),
                    ))
                }
                None => *config_budget,
            };
            let oracle = oracle_fit(train, *k)?;
            let n = train.len();
            let mut w = Array2::zeros((n, n));
            if pair_budget > 0 {
                for (i, j) in sample_pairs(n, pair_budget, run_seed ^ 0x9a17)? {
                    if oracle.judge(i, j)? {
                        w[[i, j]] = 1.0;
                        w[[j, i]] = 1.0;
                    }
                }
            }
            let graph = SimilarityGraph::new(w, GraphRole::Fairness)?;
            if graph.is_empty_graph() {
                warnings.push("fairness graph over the training split is empty".into());
            }
            Ok((
                graph,
                FairnessLabels { oracle: Some(oracle), full_equivalence: None, full_scores: None },
            ))
        }
        FairnessSource::Equivalence { path } => {
            let full = ratings_to_equivalence(&read_ratings_csv(path)?)?;
            let used = match budget {
                Some(BudgetOverride::Fraction(f)) => subsample_labels(&full, f, run_seed),
                Some(BudgetOverride::Pairs(_)) => {
                    return Err(Error::Parameter(
                        "file-backed sources sweep label fractions, not pair budgets".into(),
                    ))
                }
                None => full.clone(),
            };
            let aligned = align_equivalence(train, &used);
            let graph = equivalence_graph(&aligned)?;
            if graph.is_empty_graph() {
                warnings.push("fairness graph over the training split is empty".into());
            }
            Ok((
                graph,
                FairnessLabels { oracle: None, full_equivalence: Some(full), full_scores: None },
            ))
        }
        FairnessSource::GroupScores { path, k } => {
            let full = score_labels(&read_scores_csv(path)?, *k)?;
            let used = match budget {
                Some(BudgetOverride::Fraction(f)) => subsample_labels(&full, f, run_seed),
                Some(BudgetOverride::Pairs(_)) => {
                    return Err(Error::Parameter(
                        "file-backed sources sweep label fractions, not pair budgets".into(),
                    ))
                }
                None => full.clone(),
            };
            let aligned = align_equivalence(train, &used);
            let graph = quantile_pair_graph(&aligned, true)?;
            if graph.is_empty_graph() {
                warnings.push("fairness graph over the training split is empty".into());
            }
            Ok((
                graph,
                FairnessLabels { oracle: None, full_equivalence: None, full_scores: Some(full) },
            ))
        }
    }
}

/// Held-out fairness graph over the test split, built from the full label
/// source (never the training subsample).
fn build_wf_test(labels: &FairnessLabels, test: &Dataset) -> Result<Option<SimilarityGraph>> {
    if let Some(oracle) = &labels.oracle {
        let quantiles = oracle.assign_quantiles(test)?;
        let tagged: Vec<Option<(usize, usize)>> =
            quantiles.into_iter().map(|q| Some((0, q))).collect();
        return Ok(Some(quantile_pair_graph(&tagged, false)?));
    }
    if let Some(full) = &labels.full_equivalence {
        let aligned = align_equivalence(test, full);
        if aligned.iter().all(Option::is_none) {
            return Ok(None);
        }
        return Ok(Some(equivalence_graph(&aligned)?));
    }
    if let Some(full) = &labels.full_scores {
        let aligned = align_equivalence(test, full);
        if aligned.iter().all(Option::is_none) {
            return Ok(None);
        }
        return Ok(Some(quantile_pair_graph(&aligned, true)?));
    }
    Ok(None)
}

pub fn prepare_run(
    config: &ExperimentConfig,
    run_seed: u64,
    budget: Option<BudgetOverride>,
) -> Result<RunData> {
    let (train, test) = load_splits(config, run_seed)?;
    assert_disjoint_splits(&train, &test)?;
    let mut warnings = Vec::new();

    let standardization = standardize_fit(train.features.view());
    if !standardization.dropped.is_empty() {
        warnings.push(format!("dropped constant features: {:?}", standardization.dropped));
    }
    let z_train = standardize_apply(&standardization, train.features.view())?;
    let z_test = standardize_apply(&standardization, test.features.view())?;

    let p = config.graph.p.min(train.len().saturating_sub(1)).max(1);
    let t_train = match config.graph.t {
        Some(t) => t,
        None => heat_scale_default(z_train.view(), p)?,
    };
    let mut wx_train = knn_heat_graph(z_train.view(), p, t_train)?;
    if let Some(cap) = config.graph.edge_cap {
        wx_train = wx_train.with_edge_cap(cap, run_seed ^ 0xedca)?;
    }

    let (wf_train, labels) = build_wf_train(config, &train, run_seed, budget, &mut warnings)?;

    let p_test = config.graph.p.min(test.len().saturating_sub(1)).max(1);
    let t_test = match config.graph.t {
        Some(t) => t,
        None => heat_scale_default(z_test.view(), p_test)?,
    };
    let wx_test = knn_heat_graph(z_test.view(), p_test, t_test)?;
    let wf_test = build_wf_test(&labels, &test)?;
    if wf_test.is_none() {
        warnings.push("no held-out fairness labels cover the test split".into());
    }

    Ok(RunData {
        train,
        test,
        standardization,
        z_train,
        z_test,
        wx_train,
        wf_train,
        wx_test,
        wf_test,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub gamma: f64,
    pub d: usize,
    pub cv_auc: Option<f64>,
    pub cv_consistency_wf: Option<f64>,
    pub score: f64,
}

fn fold_indices(n: usize, folds: usize, run_seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ 0xf01d);
    order.shuffle(&mut rng);
    let mut out = vec![Vec::new(); folds];
    for (i, idx) in order.into_iter().enumerate() {
        out[i % folds].push(idx);
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    out
}

/// 5-fold grid search over (gamma, d). Returns the selected cell and every
/// evaluated cell for the grid report.
pub fn grid_search(
    run: &RunData,
    config: &ExperimentConfig,
    run_seed: u64,
) -> Result<(f64, usize, Vec<GridCell>)> {
    // with a single cell there is nothing to select; skip cross-validation
    if config.grid.gammas.len() == 1 && config.grid.dims.len() == 1 {
        let (gamma, d) = (config.grid.gammas[0], config.grid.dims[0]);
        let cell = GridCell { gamma, d, cv_auc: None, cv_consistency_wf: None, score: f64::NAN };
        return Ok((gamma, d, vec![cell]));
    }
    let folds = fold_indices(run.train.len(), config.split.folds, run_seed);
    let mut cells = Vec::new();
    let mut best: Option<(f64, usize, f64)> = None;

    for &gamma in &config.grid.gammas {
        for &d in &config.grid.dims {
            let mut fold_scores = Vec::new();
            let mut fold_aucs = Vec::new();
            let mut fold_cons = Vec::new();
            for held in 0..config.split.folds {
                let val: &[usize] = &folds[held];
                let fit: Vec<usize> = (0..config.split.folds)
                    .filter(|&f| f != held)
                    .flat_map(|f| folds[f].iter().copied())
                    .collect();
                match evaluate_fold(run, config, &fit, val, gamma, d) {
                    Ok((fold_auc, fold_consistency)) => {
                        let score = match (config.criterion, fold_consistency) {
                            (SelectionCriterion::AucPlusConsistency, Some(c)) => fold_auc + c,
                            _ => fold_auc,
                        };
                        fold_scores.push(score);
                        fold_aucs.push(fold_auc);
                        if let Some(c) = fold_consistency {
                            fold_cons.push(c);
                        }
                    }
                    Err(Error::Parameter(_)) | Err(Error::Data(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            let (score, cv_auc, cv_cons) = if fold_scores.is_empty() {
                (f64::NEG_INFINITY, None, None)
            } else {
                (
                    mean(&fold_scores),
                    Some(mean(&fold_aucs)),
                    if fold_cons.is_empty() { None } else { Some(mean(&fold_cons)) },
                )
            };
            cells.push(GridCell { gamma, d, cv_auc, cv_consistency_wf: cv_cons, score });
            let better = match best {
                None => score > f64::NEG_INFINITY,
                Some((_, _, b)) => score > b,
            };
            if better {
                best = Some((gamma, d, score));
            }
        }
    }
    let (gamma, d, _) = best.ok_or_else(|| {
        Error::Data("every grid cell failed cross-validation (degenerate folds)".into())
    })?;
    Ok((gamma, d, cells))
}

/// One fold of one grid cell: fit on `fit_idx`, score on `val_idx`.
/// Returns (AUC, consistency over the induced validation fairness subgraph).
fn evaluate_fold(
    run: &RunData,
    config: &ExperimentConfig,
    fit_idx: &[usize],
    val_idx: &[usize],
    gamma: f64,
    d: usize,
) -> Result<(f64, Option<f64>)> {
    let z_fit = select_rows(&run.z_train, fit_idx);
    let y_fit: Vec<bool> = fit_idx.iter().map(|&i| run.train.labels[i]).collect();
    let y_val: Vec<bool> = val_idx.iter().map(|&i| run.train.labels[i]).collect();
    let wx_fit = run.wx_train.induced_subgraph(fit_idx)?;
    let wf_fit = run.wf_train.induced_subgraph(fit_idx)?;

    let model = fit_linear(z_fit.view(), &wx_fit, &wf_fit, gamma, d)?;
    let embedded_fit = model.transform_batch(z_fit.view())?;
    let classifier = fit_logreg(
        embedded_fit.view(),
        &y_fit,
        config.classifier.regularization,
        config.classifier.max_iters,
        config.classifier.tol,
    )?;

    let z_val = select_rows(&run.z_train, val_idx);
    let embedded_val = model.transform_batch(z_val.view())?;
    let probs = classifier.predict_proba_batch(embedded_val.view())?;
    let fold_auc = auc(&probs, &y_val).map_err(|e| match e {
        Error::UndefinedMetric(m) => Error::Data(m),
        other => other,
    })?;

    let wf_val = run.wf_train.induced_subgraph(val_idx)?;
    let fold_consistency = if wf_val.is_empty_graph() {
        None
    } else {
        let preds: Vec<f64> = probs.iter().map(|&p| if p >= 0.5 { 1.0 } else { 0.0 }).collect();
        Some(consistency(&preds, &wf_val)?)
    };
    Ok((fold_auc, fold_consistency))
}

fn select_rows(matrix: &Array2<f64>, indices: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((indices.len(), matrix.ncols()));
    for (row, &i) in indices.iter().enumerate() {
        out.row_mut(row).assign(&matrix.row(i));
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Evaluate one score vector on the test split.
pub fn evaluate_scores(run: &RunData, probs: &[f64]) -> Result<EvaluationReport> {
    let test_auc = auc(probs, &run.test.labels)?;
    // consistency over binary predictions at threshold 0.5
    let binary: Vec<f64> = probs.iter().map(|&p| if p >= 0.5 { 1.0 } else { 0.0 }).collect();
    let consistency_wx = if run.wx_test.is_empty_graph() {
        None
    } else {
        Some(consistency(&binary, &run.wx_test)?)
    };
    let consistency_wf = match &run.wf_test {
        Some(wf) if !wf.is_empty_graph() => Some(consistency(&binary, wf)?),
        _ => None,
    };
    let preds: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
    let rates = group_rates(&preds, &run.test.labels, &run.test.groups)?;
    Ok(EvaluationReport::from_parts(test_auc, consistency_wx, consistency_wf, &rates))
}

/// Fit PFR + classifier on the full training split and score the test split.
pub fn fit_and_score(
    run: &RunData,
    config: &ExperimentConfig,
    gamma: f64,
    d: usize,
) -> Result<(PfrModel, LogisticModel, Vec<f64>)> {
    let mut model = fit_linear(run.z_train.view(), &run.wx_train, &run.wf_train, gamma, d)?;
    model.standardization = Some(run.standardization.clone());
    let embedded = model.transform_batch(run.z_train.view())?;
    let classifier = fit_logreg(
        embedded.view(),
        &run.train.labels,
        config.classifier.regularization,
        config.classifier.max_iters,
        config.classifier.tol,
    )?;
    let embedded_test = model.transform_batch(run.z_test.view())?;
    let probs = classifier.predict_proba_batch(embedded_test.view())?;
    Ok((model, classifier, probs))
}

/// The "Original" reference: logistic regression on the masked standardized
/// features, no representation learning.
pub fn original_scores(run: &RunData, config: &ExperimentConfig) -> Result<Vec<f64>> {
    let classifier = fit_logreg(
        run.z_train.view(),
        &run.train.labels,
        config.classifier.regularization,
        config.classifier.max_iters,
        config.classifier.tol,
    )?;
    classifier.predict_proba_batch(run.z_test.view())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub gamma: f64,
    pub d: usize,
    pub pfr: EvaluationReport,
    pub original: EvaluationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub type Aggregate = BTreeMap<String, Stat>;

pub fn report_fields(report: &EvaluationReport) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("auc", Some(report.auc)),
        ("consistency_wx", report.consistency_wx),
        ("consistency_wf", report.consistency_wf),
        ("fpr_g0", report.fpr_g0),
        ("fpr_g1", report.fpr_g1),
        ("fnr_g0", report.fnr_g0),
        ("fnr_g1", report.fnr_g1),
        ("ppr_g0", report.ppr_g0),
        ("ppr_g1", report.ppr_g1),
        ("gap_fpr", report.gap_fpr),
        ("gap_fnr", report.gap_fnr),
        ("gap_ppr", report.gap_ppr),
    ]
}

pub fn aggregate_reports(reports: &[EvaluationReport]) -> Aggregate {
    let mut out = BTreeMap::new();
    if reports.is_empty() {
        return out;
    }
    let names: Vec<&'static str> =
        report_fields(&reports[0]).into_iter().map(|(n, _)| n).collect();
    for name in names {
        let values: Vec<f64> = reports
            .iter()
            .flat_map(|r| {
                report_fields(r)
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .and_then(|(_, v)| v)
            })
            .collect();
        if !values.is_empty() {
            out.insert(
                name.to_string(),
                Stat { mean: mean(&values), std: std_dev(&values), n: values.len() },
            );
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ExperimentOutput {
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    pub aggregate_pfr: Aggregate,
    pub aggregate_original: Aggregate,
    /// One entry per (run, grid cell).
    pub grid: Vec<(usize, GridCell)>,
    pub warnings: Vec<String>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut runs = Vec::new();
    let mut grid = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    for run_idx in 0..config.split.runs {
        let run_seed = derive_run_seed(config.seed, run_idx);
        let run = prepare_run(config, run_seed, None)?;
        for w in &run.warnings {
            let tagged = format!("run {}: {}", run_idx, w);
            if !warnings.contains(&tagged) {
                warnings.push(tagged);
            }
        }
        let (gamma, d, cells) = grid_search(&run, config, run_seed)?;
        for cell in cells {
            grid.push((run_idx, cell));
        }
        let (_, _, probs) = fit_and_score(&run, config, gamma, d)?;
        let pfr = evaluate_scores(&run, &probs)?;
        let original = evaluate_scores(&run, &original_scores(&run, config)?)?;
        runs.push(RunRecord { run: run_idx, seed: run_seed, gamma, d, pfr, original });
    }
    let aggregate_pfr = aggregate_reports(&runs.iter().map(|r| r.pfr.clone()).collect::<Vec<_>>());
    let aggregate_original =
        aggregate_reports(&runs.iter().map(|r| r.original.clone()).collect::<Vec<_>>());
    Ok(ExperimentOutput {
        command: "experiment".into(),
        seed: config.seed,
        config: config.clone(),
        runs,
        aggregate_pfr,
        aggregate_original,
        grid,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// The swept value (gamma, or label budget / fraction).
    pub value: f64,
    pub stats: Aggregate,
}

#[derive(Debug, Serialize)]
pub struct SweepOutput {
    pub command: String,
    pub parameter: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

fn auc_for_group(probs: &[f64], labels: &[bool], groups: &[usize], g: usize) -> Option<f64> {
    let idx: Vec<usize> = (0..groups.len()).filter(|&i| groups[i] == g).collect();
    let p: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
    let y: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
    auc(&p, &y).ok()
}

/// One PFR fit + evaluation per gamma per run, all other hyper-parameters
/// held at config values (first grid entries). Tracks per-group AUC.
pub fn sweep_gamma(config: &ExperimentConfig, gammas: &[f64]) -> Result<SweepOutput> {
    config.validate()?;
    if gammas.is_empty() {
        return Err(Error::Parameter("empty gamma sweep".into()));
    }
    let d = config.grid.dims[0];
    let mut rows = Vec::new();
    let mut warnings = Vec::new();

    // runs are prepared once per run seed and reused across gammas
    let mut prepared = Vec::new();
    for run_idx in 0..config.split.runs {
        let run_seed = derive_run_seed(config.seed, run_idx);
        let run = prepare_run(config, run_seed, None)?;
        for w in &run.warnings {
            let tagged = format!("run {}: {}", run_idx, w);
            if !warnings.contains(&tagged) {
                warnings.push(tagged);
            }
        }
        prepared.push(run);
    }

    for &gamma in gammas {
        let mut reports = Vec::new();
        let mut extra: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for run in &prepared {
            let (_, _, probs) = fit_and_score(run, config, gamma, d)?;
            let report = evaluate_scores(run, &probs)?;
            let mut groups: Vec<usize> = run.test.groups.clone();
            groups.sort_unstable();
            groups.dedup();
            for (slot, g) in groups.into_iter().take(2).enumerate() {
                if let Some(a) = auc_for_group(&probs, &run.test.labels, &run.test.groups, g) {
                    extra.entry(format!("auc_g{}", slot)).or_default().push(a);
                }
            }
            reports.push(report);
        }
        let mut stats = aggregate_reports(&reports);
        for (name, values) in extra {
            stats.insert(
                name,
                Stat { mean: mean(&values), std: std_dev(&values), n: values.len() },
            );
        }
        rows.push(SweepRow { value: gamma, stats });
    }
    Ok(SweepOutput {
        command: "sweep-gamma".into(),
        parameter: "gamma".into(),
        seed: config.seed,
        config: config.clone(),
        rows,
        warnings,
    })
}

/// Default pair-budget ladder for `n` training records:
/// `[log2 n, n/5, 2n/5, 3n/5, 4n/5, n, n*log2 n, all pairs]`.
pub fn default_budget_ladder(n: usize) -> Vec<usize> {
    let log2n = (n as f64).log2();
    vec![
        log2n.ceil() as usize,
        n / 5,
        2 * n / 5,
        3 * n / 5,
        4 * n / 5,
        n,
        ((n as f64) * log2n).ceil() as usize,
        n * (n - 1) / 2,
    ]
}

/// One PFR fit + evaluation per label budget per run, gamma and d held at the
/// first grid entries; evaluation always uses the full held-out fairness
/// graph.
pub fn sweep_sparsity(config: &ExperimentConfig, budgets: &[f64]) -> Result<SweepOutput> {
    config.validate()?;
    if budgets.is_empty() {
        return Err(Error::Parameter("empty budget sweep".into()));
    }
    let gamma = config.grid.gammas[0];
    let d = config.grid.dims[0];
    let pairs_mode = matches!(config.fairness, FairnessSource::OraclePairs { .. });
    let mut rows = Vec::new();
    let mut warnings = Vec::new();

    for &value in budgets {
        let over = if pairs_mode {
            BudgetOverride::Pairs(value.round() as usize)
        } else {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parameter(format!("label fraction {} outside [0, 1]", value)));
            }
            BudgetOverride::Fraction(value)
        };
        let mut reports = Vec::new();
        for run_idx in 0..config.split.runs {
            let run_seed = derive_run_seed(config.seed, run_idx);
            let run = prepare_run(config, run_seed, Some(over))?;
            for w in &run.warnings {
                let tagged = format!("budget {} run {}: {}", value, run_idx, w);
                if !warnings.contains(&tagged) {
                    warnings.push(tagged);
                }
            }
            let (_, _, probs) = fit_and_score(&run, config, gamma, d)?;
            reports.push(evaluate_scores(&run, &probs)?);
        }
        rows.push(SweepRow { value, stats: aggregate_reports(&reports) });
    }
    Ok(SweepOutput {
        command: "sweep-sparsity".into(),
        parameter: if pairs_mode { "pair_budget".into() } else { "label_fraction".into() },
        seed: config.seed,
        config: config.clone(),
        rows,
        warnings,
    })
}
