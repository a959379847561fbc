//! `pfr` — pairwise-fair representation experiments from the command line.

use clap::{Args, Parser, Subcommand};
use pfr_cli::config::{self, ExperimentConfig};
use pfr_cli::{output, pipeline};
use pfr_core::data::{export_csv, generate_synthetic, SyntheticVariant};
use pfr_core::model::fit_linear;
use pfr_core::{Error, PfrModel, Result, SimilarityGraph};
use pipeline::{
    default_budget_ladder, derive_run_seed, original_scores, prepare_run,
    run_experiment, sweep_gamma, sweep_sparsity,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pfr", about = "Pairwise-fair representation learning toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic admissions data and write train/test CSVs.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        n_train: usize,
        #[arg(long, default_value_t = 400)]
        n_test: usize,
        /// low | high
        #[arg(long, default_value = "low")]
        variant: String,
        #[arg(long)]
        quiet: bool,
    },
    /// Build the similarity and fairness graphs over the training split and
    /// write their edge lists.
    BuildGraph(CommonArgs),
    /// Fit a projection on the training split (first grid cell) and save it.
    Fit(CommonArgs),
    /// Apply a saved model to the test split and write the embedding.
    Transform {
        #[command(flatten)]
        common: CommonArgs,
        /// Saved model JSON (from `fit`).
        #[arg(long)]
        model: PathBuf,
    },
    /// Evaluate a saved model's downstream classifier on the test split.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Full protocol: grid-search cross-validation, refit, test evaluation,
    /// repeated over seeded runs.
    Experiment(CommonArgs),
    /// One fit + evaluation per gamma per run, other settings held fixed.
    SweepGamma {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated gamma values; defaults to the config grid.
        #[arg(long)]
        gammas: Option<String>,
    },
    /// One fit + evaluation per fairness-label budget per run.
    SweepSparsity {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated budgets (pair counts for the oracle source,
        /// fractions for file-backed sources); defaults to a ladder from
        /// log2(n) to all pairs.
        #[arg(long)]
        budgets: Option<String>,
    },
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Parameter(format!("{}: {}", args.config.display(), e)))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("unparseable list entry {:?}", v)))
        })
        .collect()
}

fn write_edge_list(graph: &SimilarityGraph, path: &Path) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer.write_record(["i", "j", "weight"]).map_err(|e| Error::Serialization(e.to_string()))?;
    let w = graph.weights();
    for i in 0..graph.size() {
        for j in i + 1..graph.size() {
            if w[[i, j]] > 0.0 {
                writer
                    .write_record([i.to_string(), j.to_string(), format!("{:.6}", w[[i, j]])])
                    .map_err(|e| Error::Serialization(e.to_string()))?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn cmd_synth(
    seed: u64,
    out: &Path,
    n_train: usize,
    n_test: usize,
    variant: &str,
    quiet: bool,
) -> Result<()> {
    let variant = match variant {
        "low" => SyntheticVariant::LowDim,
        "high" => SyntheticVariant::HighDim,
        other => return Err(Error::Parameter(format!("unknown variant {:?}", other))),
    };
    ensure_dir(out)?;
    let (train, test) = generate_synthetic(n_train, n_test, seed, variant);
    export_csv(&train, &out.join("train.csv"))?;
    export_csv(&test, &out.join("test.csv"))?;
    if !quiet {
        println!(
            "wrote {} train and {} test records to {}",
            train.len(),
            test.len(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_build_graph(args: &CommonArgs) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let run = prepare_run(&config, derive_run_seed(config.seed, 0), None)?;
    write_edge_list(&run.wx_train, &args.out.join("wx.csv"))?;
    write_edge_list(&run.wf_train, &args.out.join("wf.csv"))?;
    #[derive(serde::Serialize)]
    struct GraphStats {
        seed: u64,
        config: ExperimentConfig,
        records: usize,
        wx_edges: usize,
        wf_edges: usize,
        warnings: Vec<String>,
    }
    output::write_json(
        &GraphStats {
            seed: config.seed,
            config: config.clone(),
            records: run.train.len(),
            wx_edges: run.wx_train.edge_count(),
            wf_edges: run.wf_train.edge_count(),
            warnings: run.warnings.clone(),
        },
        &args.out.join("report.json"),
    )?;
    if !args.quiet {
        println!(
            "graphs over {} records: {} similarity edges, {} fairness edges",
            run.train.len(),
            run.wx_train.edge_count(),
            run.wf_train.edge_count()
        );
    }
    Ok(())
}

fn cmd_fit(args: &CommonArgs) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let run = prepare_run(&config, derive_run_seed(config.seed, 0), None)?;
    let gamma = config.grid.gammas[0];
    let d = config.grid.dims[0];
    let mut model = fit_linear(run.z_train.view(), &run.wx_train, &run.wf_train, gamma, d)?;
    model.standardization = Some(run.standardization.clone());
    model.save(&args.out.join("model.json"))?;
    if !args.quiet {
        println!(
            "fitted gamma={} d={} (loss_x={:.6e}, loss_f={:.6e}); saved model.json",
            gamma, d, model.loss_x, model.loss_f
        );
    }
    Ok(())
}

fn cmd_transform(args: &CommonArgs, model_path: &Path) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let run = prepare_run(&config, derive_run_seed(config.seed, 0), None)?;
    let model = PfrModel::load(model_path)?;
    let embedded = model.transform_batch(run.z_test.view())?;
    let path = args.out.join("embedding.csv");
    let mut writer =
        csv::Writer::from_path(&path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut header = vec!["id".to_string()];
    header.extend((0..model.latent_dim).map(|k| format!("z{}", k)));
    writer.write_record(&header).map_err(|e| Error::Serialization(e.to_string()))?;
    for i in 0..run.test.len() {
        let mut row = vec![run.test.ids[i].clone()];
        row.extend((0..model.latent_dim).map(|k| format!("{:.17e}", embedded[[i, k]])));
        writer.write_record(&row).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer.flush()?;
    if !args.quiet {
        println!("wrote {} embedded records to {}", run.test.len(), path.display());
    }
    Ok(())
}

fn cmd_evaluate(args: &CommonArgs, model_path: &Path) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let run = prepare_run(&config, derive_run_seed(config.seed, 0), None)?;
    let model = PfrModel::load(model_path)?;
    let embedded_train = model.transform_batch(run.z_train.view())?;
    let classifier = pfr_core::downstream::fit_logreg(
        embedded_train.view(),
        &run.train.labels,
        config.classifier.regularization,
        config.classifier.max_iters,
        config.classifier.tol,
    )?;
    let embedded_test = model.transform_batch(run.z_test.view())?;
    let probs = classifier.predict_proba_batch(embedded_test.view())?;
    let pfr = pipeline_evaluate(&run, &probs)?;
    let original = pipeline_evaluate(&run, &original_scores(&run, &config)?)?;
    #[derive(serde::Serialize)]
    struct EvalDoc {
        seed: u64,
        config: ExperimentConfig,
        gamma: f64,
        d: usize,
        pfr: pfr_core::downstream::EvaluationReport,
        original: pfr_core::downstream::EvaluationReport,
        warnings: Vec<String>,
    }
    output::write_json(
        &EvalDoc {
            seed: config.seed,
            config: config.clone(),
            gamma: model.gamma,
            d: model.latent_dim,
            pfr: pfr.clone(),
            original,
            warnings: run.warnings.clone(),
        },
        &args.out.join("report.json"),
    )?;
    if !args.quiet {
        println!(
            "test AUC {:.4}, consistency_wf {}",
            pfr.auc,
            pfr.consistency_wf.map(|c| format!("{:.4}", c)).unwrap_or_else(|| "n/a".into())
        );
    }
    Ok(())
}

fn pipeline_evaluate(
    run: &pipeline::RunData,
    probs: &[f64],
) -> Result<pfr_core::downstream::EvaluationReport> {
    pipeline::evaluate_scores(run, probs)
}

fn cmd_experiment(args: &CommonArgs) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let result = run_experiment(&config)?;
    output::write_json(&result, &args.out.join("report.json"))?;
    output::write_runs_csv(&result, &args.out.join("runs.csv"))?;
    output::write_grid_csv(&result, &args.out.join("grid.csv"))?;
    if !args.quiet {
        for (name, agg) in
            [("pfr", &result.aggregate_pfr), ("original", &result.aggregate_original)]
        {
            let auc = agg.get("auc").map(|s| s.mean).unwrap_or(f64::NAN);
            let cons = agg
                .get("consistency_wf")
                .map(|s| format!("{:.4}", s.mean))
                .unwrap_or_else(|| "n/a".into());
            println!("{}: mean AUC {:.4}, mean consistency_wf {}", name, auc, cons);
        }
    }
    Ok(())
}

fn cmd_sweep_gamma(args: &CommonArgs, gammas: Option<&str>) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let gammas = match gammas {
        Some(text) => parse_list(text)?,
        None => config.grid.gammas.clone(),
    };
    let result = sweep_gamma(&config, &gammas)?;
    output::write_json(&result, &args.out.join("report.json"))?;
    output::write_sweep_csv(&result, &args.out.join("sweep.csv"))?;
    if !args.quiet {
        println!("swept {} gamma values over {} runs", result.rows.len(), config.split.runs);
    }
    Ok(())
}

fn cmd_sweep_sparsity(args: &CommonArgs, budgets: Option<&str>) -> Result<()> {
    let config = load_config(args)?;
    ensure_dir(&args.out)?;
    let budgets = match budgets {
        Some(text) => parse_list(text)?,
        None => {
            let n = match &config.dataset {
                config::DatasetSource::Synthetic { n_train, .. } => *n_train,
                _ => {
                    return Err(Error::Parameter(
                        "budget ladder default needs a synthetic dataset; pass --budgets".into(),
                    ))
                }
            };
            default_budget_ladder(n).into_iter().map(|b| b as f64).collect()
        }
    };
    let result = sweep_sparsity(&config, &budgets)?;
    output::write_json(&result, &args.out.join("report.json"))?;
    output::write_sweep_csv(&result, &args.out.join("sweep.csv"))?;
    if !args.quiet {
        println!("swept {} budgets over {} runs", result.rows.len(), config.split.runs);
    }
    Ok(())
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Parameter(_) | Error::Input(_) | Error::Dimension(_) => 2,
        Error::Data(_) | Error::Io(_) | Error::Serialization(_) => 3,
        Error::Numerical(_) | Error::UndefinedMetric(_) => 4,
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth { seed, out, n_train, n_test, variant, quiet } => {
            cmd_synth(*seed, out, *n_train, *n_test, variant, *quiet)
        }
        Command::BuildGraph(args) => cmd_build_graph(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Transform { common, model } => cmd_transform(common, model),
        Command::Evaluate { common, model } => cmd_evaluate(common, model),
        Command::Experiment(args) => cmd_experiment(args),
        Command::SweepGamma { common, gammas } => cmd_sweep_gamma(common, gammas.as_deref()),
        Command::SweepSparsity { common, budgets } => {
            cmd_sweep_sparsity(common, budgets.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code_for(&e))
        }
    }
}
