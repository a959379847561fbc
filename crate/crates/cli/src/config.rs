//! Experiment configuration: a single JSON document controlling data source,
//! fairness-label source, graph construction, the model grid, classifier
//! settings and the split protocol.

use pfr_core::data::CsvSchema;
use pfr_core::data::SyntheticVariant;
use pfr_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic {
        #[serde(default = "default_n_train")]
        n_train: usize,
        #[serde(default = "default_n_test")]
        n_test: usize,
        #[serde(default = "default_variant")]
        variant: SyntheticVariant,
    },
    Csv {
        train_path: PathBuf,
        #[serde(default)]
        test_path: Option<PathBuf>,
        schema: CsvSchema,
        /// Used only when `test_path` is absent: the file is shuffled and
        /// split per run.
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
    },
}

fn default_n_train() -> usize {
    600
}
fn default_n_test() -> usize {
    400
}
fn default_variant() -> SyntheticVariant {
    SyntheticVariant::LowDim
}
fn default_train_fraction() -> f64 {
    0.6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FairnessSource {
    /// Simulated pairwise judgments from per-group models, under a pair
    /// budget sampled uniformly from the training split.
    OraclePairs {
        #[serde(default = "default_quantiles")]
        k: usize,
        budget: usize,
    },
    /// Per-id star ratings (CSV `id,rating`), binned to half-star
    /// equivalence classes.
    Equivalence { path: PathBuf },
    /// Per-id scores with group (CSV `id,group,score`), quantile-matched
    /// across groups.
    GroupScores {
        path: PathBuf,
        #[serde(default = "default_quantiles")]
        k: usize,
    },
}

fn default_quantiles() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphParams {
    #[serde(default = "default_neighbors")]
    pub p: usize,
    /// Heat-kernel scale; data-driven default when absent.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub edge_cap: Option<usize>,
}

fn default_neighbors() -> usize {
    10
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams { p: default_neighbors(), t: None, edge_cap: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelGrid {
    pub gammas: Vec<f64>,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierParams {
    #[serde(default = "default_regularization")]
    pub regularization: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_regularization() -> f64 {
    1e-4
}
fn default_max_iters() -> usize {
    5000
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            regularization: default_regularization(),
            max_iters: default_max_iters(),
            tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitParams {
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
}

fn default_folds() -> usize {
    5
}
fn default_runs() -> usize {
    10
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams { folds: default_folds(), runs: default_runs() }
    }
}

/// Model-selection criterion maximized during grid-search cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    /// Unweighted sum of validation AUC and validation consistency over the
    /// induced fairness subgraph (folds with no induced edges contribute
    /// only AUC).
    AucPlusConsistency,
    Auc,
}

impl Default for SelectionCriterion {
    fn default() -> Self {
        SelectionCriterion::AucPlusConsistency
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub fairness: FairnessSource,
    #[serde(default)]
    pub graph: GraphParams,
    pub grid: ModelGrid,
    #[serde(default)]
    pub classifier: ClassifierParams,
    #[serde(default)]
    pub split: SplitParams,
    #[serde(default)]
    pub criterion: SelectionCriterion,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let DatasetSource::Csv { train_fraction, test_path, .. } = &self.dataset {
            if test_path.is_none() && !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                return Err(Error::Parameter(format!(
                    "train fraction {} outside (0, 1)",
                    train_fraction
                )));
            }
        }
        if self.split.folds < 2 {
            return Err(Error::Parameter("need at least 2 cross-validation folds".into()));
        }
        if self.split.runs < 1 {
            return Err(Error::Parameter("need at least 1 run".into()));
        }
        if self.grid.gammas.is_empty() || self.grid.dims.is_empty() {
            return Err(Error::Parameter("empty hyper-parameter grid".into()));
        }
        for &g in &self.grid.gammas {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Parameter(format!("gamma {} outside [0, 1]", g)));
            }
        }
        if self.grid.dims.iter().any(|&d| d == 0) {
            return Err(Error::Parameter("latent dimension 0 in grid".into()));
        }
        if self.graph.p == 0 {
            return Err(Error::Parameter("neighbor count must be positive".into()));
        }
        if let Some(t) = self.graph.t {
            if !(t > 0.0) {
                return Err(Error::Parameter("heat-kernel scale must be positive".into()));
            }
        }
        if let FairnessSource::OraclePairs { k, .. } | FairnessSource::GroupScores { k, .. } =
            &self.fairness
        {
            if *k < 1 {
                return Err(Error::Parameter("quantile count must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("config: {}", e)))?;
        config.validate()?;
        Ok(config)
    }
}
