//! Dataset ingestion and preprocessing, the synthetic admissions generator
//! with its fairness oracle, and conversion of elicited labels (pairs,
//! ratings, per-group scores) into graph-module inputs.
//!
//! Protected attributes are excluded from the feature matrix everywhere; the
//! group value is carried separately and used only for graph construction and
//! evaluation.

use crate::downstream::{fit_logreg, LogisticModel};
use crate::graph::{quantile_assign, QuantileAssignment};
use crate::{Error, Result};
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

/// Records with identifiers, a feature matrix (protected attribute excluded),
/// binary labels and a categorical group value per record.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub features: Array2<f64>,
    pub labels: Vec<bool>,
    pub groups: Vec<usize>,
    pub group_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub group_attribute: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.features.nrows() != n || self.labels.len() != n || self.groups.len() != n {
            return Err(Error::Data("inconsistent record counts".into()));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature values".into()));
        }
        let positives = self.labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == n {
            return Err(Error::Data("labels contain a single class".into()));
        }
        Ok(())
    }

    /// Row subset preserving order of `indices`.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Array2::zeros((indices.len(), self.feature_dim()));
        let mut ids = Vec::with_capacity(indices.len());
        let mut labels = Vec::with_capacity(indices.len());
        let mut groups = Vec::with_capacity(indices.len());
        for (row, &i) in indices.iter().enumerate() {
            if i >= self.len() {
                return Err(Error::Dimension("subset index out of range".into()));
            }
            features.row_mut(row).assign(&self.features.row(i));
            ids.push(self.ids[i].clone());
            labels.push(self.labels[i]);
            groups.push(self.groups[i]);
        }
        Ok(Dataset {
            ids,
            features,
            labels,
            groups,
            group_names: self.group_names.clone(),
            feature_names: self.feature_names.clone(),
            group_attribute: self.group_attribute.clone(),
        })
    }
}

/// Which columns of a CSV carry the label and the protected group, and which
/// feature columns are categorical (one-hot encoded on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    pub group_column: String,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    #[serde(default)]
    pub id_column: Option<String>,
}

fn parse_label(raw: &str, line: usize) -> Result<bool> {
    match raw.trim() {
        "1" | "true" | "True" => Ok(true),
        "0" | "false" | "False" => Ok(false),
        other => Err(Error::Data(format!("line {}: unparseable label {:?}", line, other))),
    }
}

/// Load a UTF-8 CSV with header. Categorical feature columns are one-hot
/// encoded; the group column is removed from the features and stored
/// separately; rows with unparseable numerics are rejected with their line
/// number.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {}", path.display(), e)))?;
    let headers: Vec<String> =
        reader.headers().map_err(|e| Error::Data(e.to_string()))?.iter().map(String::from).collect();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column {:?}", name)))
    };
    let label_idx = col(&schema.label_column)?;
    let group_idx = col(&schema.group_column)?;
    let id_idx = match &schema.id_column {
        Some(name) => Some(col(name)?),
        None => None,
    };
    let categorical: HashSet<usize> = schema
        .categorical_columns
        .iter()
        .map(|name| col(name))
        .collect::<Result<_>>()?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("line {}: {}", i + 2, e)))?;
        rows.push(record.iter().map(String::from).collect());
    }
    if rows.is_empty() {
        return Err(Error::Data("empty file".into()));
    }

    // levels for categorical columns and the group column, sorted for determinism
    let mut levels: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    let mut group_levels: BTreeSet<String> = BTreeSet::new();
    for row in &rows {
        group_levels.insert(row[group_idx].clone());
        for &c in &categorical {
            levels.entry(c).or_default().insert(row[c].clone());
        }
    }
    let group_names: Vec<String> = group_levels.into_iter().collect();

    // feature layout: numeric columns in header order, then one-hot blocks
    let mut numeric_cols: Vec<usize> = Vec::new();
    let mut feature_names: Vec<String> = Vec::new();
    for (c, name) in headers.iter().enumerate() {
        if c == label_idx || c == group_idx || Some(c) == id_idx || categorical.contains(&c) {
            continue;
        }
        numeric_cols.push(c);
        feature_names.push(name.clone());
    }
    let mut onehot: Vec<(usize, Vec<String>)> = Vec::new();
    for (&c, values) in &levels {
        let values: Vec<String> = values.iter().cloned().collect();
        for v in &values {
            feature_names.push(format!("{}={}", headers[c], v));
        }
        onehot.push((c, values));
    }

    let n = rows.len();
    let m = feature_names.len();
    let mut features = Array2::zeros((n, m));
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for (r, row) in rows.iter().enumerate() {
        let line = r + 2; // header is line 1
        let mut f = 0usize;
        for &c in &numeric_cols {
            features[[r, f]] = row[c].trim().parse::<f64>().map_err(|_| {
                Error::Data(format!("line {}: unparseable numeric {:?} in column {:?}", line, row[c], headers[c]))
            })?;
            f += 1;
        }
        for (c, values) in &onehot {
            for v in values {
                features[[r, f]] = if &row[*c] == v { 1.0 } else { 0.0 };
                f += 1;
            }
        }
        labels.push(parse_label(&row[label_idx], line)?);
        groups.push(group_names.iter().position(|g| g == &row[group_idx]).unwrap());
        ids.push(match id_idx {
            Some(c) => row[c].clone(),
            None => r.to_string(),
        });
    }

    let dataset = Dataset {
        ids,
        features,
        labels,
        groups,
        group_names,
        feature_names,
        group_attribute: schema.group_column.clone(),
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Write a dataset back out in the same schema `load_csv` consumes:
/// `id, <features...>, group, label`.
pub fn export_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    let mut header = vec!["id".to_string()];
    header.extend(dataset.feature_names.iter().cloned());
    header.push(dataset.group_attribute.clone());
    header.push("label".to_string());
    writer.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for i in 0..dataset.len() {
        let mut row = vec![dataset.ids[i].clone()];
        for j in 0..dataset.feature_dim() {
            row.push(format!("{:.17e}", dataset.features[[i, j]]));
        }
        row.push(dataset.group_names[dataset.groups[i]].clone());
        row.push(if dataset.labels[i] { "1".into() } else { "0".into() });
        writer.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-feature z-score parameters, fit on the training split only. Constant
/// features are dropped (`kept` holds the surviving column indices).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

pub fn standardize_fit(features: ArrayView2<'_, f64>) -> StandardizationParams {
    let n = features.nrows();
    let m = features.ncols();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..m {
        let mean: f64 = (0..n).map(|i| features[[i, j]]).sum::<f64>() / n as f64;
        let var: f64 =
            (0..n).map(|i| (features[[i, j]] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std > 0.0 {
            means.push(mean);
            stds.push(std);
            kept.push(j);
        } else {
            dropped.push(j);
        }
    }
    StandardizationParams { means, stds, kept, dropped }
}

pub fn standardize_apply(
    params: &StandardizationParams,
    features: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let n = features.nrows();
    if let Some(&max_col) = params.kept.iter().max() {
        if max_col >= features.ncols() {
            return Err(Error::Dimension("standardization params do not match feature dim".into()));
        }
    }
    let m = params.kept.len();
    let mut out = Array2::zeros((n, m));
    for (col, &j) in params.kept.iter().enumerate() {
        for i in 0..n {
            out[[i, col]] = (features[[i, j]] - params.means[col]) / params.stds[col];
        }
    }
    Ok(out)
}

/// Which feature set the synthetic generator exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticVariant {
    /// Only the two base features (academic, supplementary).
    LowDim,
    /// Base features plus 100 + 100 correlated features.
    HighDim,
}

const CORRELATED_PER_BASE: usize = 100;
const BASE_CORRELATION: f64 = 0.3;

/// Simulated US-admissions data for two groups. Group `s=0` (non-protected)
/// has the supplementary-related feature means shifted one standard deviation
/// up; ground-truth labels compensate for exactly that shift, so the two
/// groups are equally deserving after adjustment.
///
/// Deterministic under `seed`. Returns `(train, test)`.
pub fn generate_synthetic(
    n_train: usize,
    n_test: usize,
    seed: u64,
    variant: SyntheticVariant,
) -> (Dataset, Dataset) {
    let n = n_train + n_test;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // per-dataset correlations of the derived features with their base
    let rho_academic: Vec<f64> =
        (0..CORRELATED_PER_BASE).map(|_| rng.gen_range(0.75..=1.0)).collect();
    let rho_supplementary: Vec<f64> =
        (0..CORRELATED_PER_BASE).map(|_| rng.gen_range(0.75..=1.0)).collect();

    // balanced groups, order shuffled before the train/test split
    let mut group_of: Vec<usize> = (0..n).map(|i| i % 2).collect();
    group_of.shuffle(&mut rng);

    let m = match variant {
        SyntheticVariant::LowDim => 2,
        SyntheticVariant::HighDim => 2 + 2 * CORRELATED_PER_BASE,
    };
    let mut features = Array2::zeros((n, m));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let s = group_of[i];
        let shift = if s == 0 { 1.0 } else { 0.0 };
        let academic: f64 = rng.sample(StandardNormal);
        let noise: f64 = rng.sample(StandardNormal);
        let supp_centered =
            BASE_CORRELATION * academic + (1.0 - BASE_CORRELATION.powi(2)).sqrt() * noise;
        let supplementary = supp_centered + shift;
        features[[i, 0]] = academic;
        features[[i, 1]] = supplementary;
        if variant == SyntheticVariant::HighDim {
            for (j, &rho) in rho_academic.iter().enumerate() {
                let e: f64 = rng.sample(StandardNormal);
                features[[i, 2 + j]] = rho * academic + (1.0 - rho * rho).sqrt() * e;
            }
            for (j, &rho) in rho_supplementary.iter().enumerate() {
                let e: f64 = rng.sample(StandardNormal);
                features[[i, 2 + CORRELATED_PER_BASE + j]] =
                    rho * supp_centered + (1.0 - rho * rho).sqrt() * e + shift;
            }
        }
        let threshold = if s == 0 { 1.0 } else { 0.0 };
        labels.push(academic + supplementary >= threshold);
    }

    let mut feature_names = vec!["academic".to_string(), "supplementary".to_string()];
    if variant == SyntheticVariant::HighDim {
        for j in 0..CORRELATED_PER_BASE {
            feature_names.push(format!("academic_corr_{}", j));
        }
        for j in 0..CORRELATED_PER_BASE {
            feature_names.push(format!("supplementary_corr_{}", j));
        }
    }

    let make = |range: std::ops::Range<usize>| -> Dataset {
        let indices: Vec<usize> = range.collect();
        let mut f = Array2::zeros((indices.len(), m));
        let mut ids = Vec::new();
        let mut l = Vec::new();
        let mut g = Vec::new();
        for (row, &i) in indices.iter().enumerate() {
            f.row_mut(row).assign(&features.row(i));
            ids.push(format!("r{}", i));
            l.push(labels[i]);
            g.push(group_of[i]);
        }
        Dataset {
            ids,
            features: f,
            labels: l,
            groups: g,
            group_names: vec!["0".into(), "1".into()],
            feature_names: feature_names.clone(),
            group_attribute: "group".into(),
        }
    };
    (make(0..n_train), make(n_train..n))
}

/// Ground-truth fairness simulator: one logistic model per group, judging two
/// records equally deserving when their predicted probabilities (each scored
/// by its own group's model) fall in the same per-group probability quantile.
#[derive(Debug, Clone)]
pub struct FairnessOracle {
    group_models: Vec<(usize, LogisticModel<f64>)>,
    standardization: StandardizationParams,
    pub k: usize,
    /// Quantile of each training record, precomputed at fit time.
    train_quantiles: Vec<usize>,
}

pub fn oracle_fit(train: &Dataset, k: usize) -> Result<FairnessOracle> {
    if k < 1 {
        return Err(Error::Parameter("quantile count must be at least 1".into()));
    }
    let mut groups: Vec<usize> = train.groups.clone();
    groups.sort_unstable();
    groups.dedup();
    if groups.len() < 2 {
        return Err(Error::Data("oracle needs at least two groups in training data".into()));
    }
    let standardization = standardize_fit(train.features.view());
    let z = standardize_apply(&standardization, train.features.view())?;
    let mut group_models = Vec::new();
    for &g in &groups {
        let idx: Vec<usize> = (0..train.len()).filter(|&i| train.groups[i] == g).collect();
        if idx.is_empty() {
            return Err(Error::Data(format!("group {} absent from training data", g)));
        }
        let mut zg = Array2::zeros((idx.len(), z.ncols()));
        let mut yg = Vec::new();
        for (row, &i) in idx.iter().enumerate() {
            zg.row_mut(row).assign(&z.row(i));
            yg.push(train.labels[i]);
        }
        let model = fit_logreg(zg.view(), &yg, 1e-4, 2000, 1e-8)
            .map_err(|e| Error::Data(format!("oracle model for group {}: {}", g, e)))?;
        group_models.push((g, model));
    }
    let oracle = FairnessOracle { group_models, standardization, k, train_quantiles: Vec::new() };
    let train_quantiles = oracle.assign_quantiles(train)?;
    Ok(FairnessOracle { train_quantiles, ..oracle })
}

impl FairnessOracle {
    fn model_for(&self, group: usize) -> Result<&LogisticModel<f64>> {
        self.group_models
            .iter()
            .find(|(g, _)| *g == group)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Data(format!("no oracle model for group {}", group)))
    }

    /// Per-group probability quantiles for an arbitrary dataset (used to build
    /// held-out fairness graphs for evaluation).
    pub fn assign_quantiles(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        let z = standardize_apply(&self.standardization, dataset.features.view())?;
        let mut scored: Vec<(usize, f64)> = Vec::with_capacity(dataset.len());
        for i in 0..dataset.len() {
            let model = self.model_for(dataset.groups[i])?;
            scored.push((dataset.groups[i], model.predict_proba(z.row(i))?));
        }
        let qa = quantile_assign(&scored, self.k)?;
        Ok(qa.quantiles)
    }

    /// True when the two training records fall in the same probability
    /// quantile of their respective groups. Reflexive and symmetric.
    pub fn judge(&self, i: usize, j: usize) -> Result<bool> {
        let q = &self.train_quantiles;
        if i >= q.len() || j >= q.len() {
            return Err(Error::Dimension("record index out of oracle range".into()));
        }
        Ok(q[i] == q[j])
    }

    pub fn train_quantiles(&self) -> &[usize] {
        &self.train_quantiles
    }
}

/// Uniform sample without replacement of unordered record pairs `(i, j)`,
/// `i < j`, deterministic under `seed`.
pub fn sample_pairs(n: usize, budget: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let total = n * (n - 1) / 2;
    if budget > total {
        return Err(Error::Parameter(format!(
            "budget {} exceeds {} available pairs",
            budget, total
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if budget * 2 >= total {
        let mut all: Vec<(usize, usize)> = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                all.push((i, j));
            }
        }
        all.shuffle(&mut rng);
        all.truncate(budget);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(budget);
    let mut pairs = Vec::with_capacity(budget);
    while pairs.len() < budget {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if seen.insert(pair) {
            pairs.push(pair);
        }
    }
    Ok(pairs)
}

/// Bin star ratings to equivalence classes at half-star granularity. Exact
/// `.25` midpoints round half-up. Classes are the doubled half-star value
/// (2..=10). Ids without ratings stay unlabeled downstream.
pub fn ratings_to_equivalence(ratings: &[(String, f64)]) -> Result<Vec<(String, u8)>> {
    let mut out = Vec::with_capacity(ratings.len());
    for (id, rating) in ratings {
        if !(1.0..=5.0).contains(rating) {
            return Err(Error::Data(format!("rating {} for {:?} outside [1, 5]", rating, id)));
        }
        // nearest half star, f64::round ties away from zero = half-up here
        let class = (rating * 2.0).round() as u8;
        out.push((id.clone(), class));
    }
    Ok(out)
}

/// Align per-id equivalence labels to a dataset's record order; ids without a
/// label come back as `None`.
pub fn align_equivalence<C: Clone>(
    dataset: &Dataset,
    labels: &[(String, C)],
) -> Vec<Option<C>> {
    let by_id: HashMap<&str, &C> = labels.iter().map(|(id, c)| (id.as_str(), c)).collect();
    dataset.ids.iter().map(|id| by_id.get(id.as_str()).map(|&c| c.clone())).collect()
}

/// Convert per-id `(group, score)` rankings into a quantile assignment over
/// the given id order. Score ties break by id (ascending), making the
/// assignment independent of input order.
pub fn scores_to_group_rankings(
    scores: &[(String, String, f64)],
    k: usize,
) -> Result<(Vec<String>, Vec<String>, QuantileAssignment)> {
    if scores.is_empty() {
        return Err(Error::Data("no scores".into()));
    }
    let mut group_names: Vec<String> = scores.iter().map(|(_, g, _)| g.clone()).collect();
    group_names.sort();
    group_names.dedup();
    if group_names.len() < 2 {
        return Err(Error::Parameter("per-group scores cover a single group".into()));
    }
    // order records by id so that quantile_assign's index tie-break is an
    // id tie-break
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.cmp(&scores[b].0));
    let sorted: Vec<(usize, f64)> = order
        .iter()
        .map(|&i| {
            let g = group_names.iter().position(|n| n == &scores[i].1).unwrap();
            (g, scores[i].2)
        })
        .collect();
    let qa = quantile_assign(&sorted, k)?;
    let ids: Vec<String> = order.iter().map(|&i| scores[i].0.clone()).collect();
    Ok((ids, group_names, qa))
}
