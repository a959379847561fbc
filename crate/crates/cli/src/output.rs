//! Report writers. JSON carries full double precision; CSV rounds to six
//! decimal digits. Output is fully deterministic for a fixed config + seed.

use crate::pipeline::{report_fields, ExperimentOutput, SweepOutput};
use pfr_core::downstream::EvaluationReport;
use pfr_core::{Error, Result};
use std::fs;
use std::path::Path;

fn fmt6(value: Option<f64>) -> String {
    value.map(|v| format!("{:.6}", v)).unwrap_or_default()
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

const METRIC_COLUMNS: [&str; 12] = [
    "auc",
    "consistency_wx",
    "consistency_wf",
    "fpr_g0",
    "fpr_g1",
    "fnr_g0",
    "fnr_g1",
    "ppr_g0",
    "ppr_g1",
    "gap_fpr",
    "gap_fnr",
    "gap_ppr",
];

fn metric_values(report: &EvaluationReport) -> Vec<String> {
    report_fields(report).into_iter().map(|(_, v)| fmt6(v)).collect()
}

pub fn write_runs_csv(output: &ExperimentOutput, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut header = vec!["run", "seed", "method", "gamma", "d"];
    header.extend(METRIC_COLUMNS);
    writer.write_record(&header).map_err(|e| Error::Serialization(e.to_string()))?;
    for record in &output.runs {
        for (method, report) in [("pfr", &record.pfr), ("original", &record.original)] {
            let mut row = vec![
                record.run.to_string(),
                record.seed.to_string(),
                method.to_string(),
            ];
            if method == "pfr" {
                row.push(format!("{:.6}", record.gamma));
                row.push(record.d.to_string());
            } else {
                row.push(String::new());
                row.push(String::new());
            }
            row.extend(metric_values(report));
            writer.write_record(&row).map_err(|e| Error::Serialization(e.to_string()))?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_grid_csv(output: &ExperimentOutput, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer
        .write_record(["run", "gamma", "d", "cv_auc", "cv_consistency_wf", "score"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for (run, cell) in &output.grid {
        let score = if cell.score.is_finite() { format!("{:.6}", cell.score) } else { String::new() };
        writer
            .write_record([
                run.to_string(),
                format!("{:.6}", cell.gamma),
                cell.d.to_string(),
                fmt6(cell.cv_auc),
                fmt6(cell.cv_consistency_wf),
                score,
            ])
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Long-format sweep table: one row per (swept value, metric).
pub fn write_sweep_csv(output: &SweepOutput, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer
        .write_record(["parameter", "value", "metric", "mean", "std", "n"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for row in &output.rows {
        for (metric, stat) in &row.stats {
            writer
                .write_record([
                    output.parameter.clone(),
                    format!("{:.6}", row.value),
                    metric.clone(),
                    format!("{:.6}", stat.mean),
                    format!("{:.6}", stat.std),
                    stat.n.to_string(),
                ])
                .map_err(|e| Error::Serialization(e.to_string()))?;
        }
    }
    writer.flush()?;
    Ok(())
}
