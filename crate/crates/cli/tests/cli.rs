//! End-to-end checks of the `pfr` binary: subcommand outputs and exit codes.

use std::path::Path;
use std::process::Command;

fn pfr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pfr"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let text = r#"{
        "dataset": {"source": "synthetic", "n_train": 120, "n_test": 80, "variant": "low_dim"},
        "fairness": {"source": "oracle_pairs", "k": 10, "budget": 800},
        "grid": {"gammas": [0.8], "dims": [1]},
        "classifier": {"max_iters": 500},
        "split": {"folds": 2, "runs": 1},
        "seed": 7
    }"#;
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn synth_writes_train_and_test_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = pfr()
        .args(["synth", "--seed", "3", "--n-train", "50", "--n-test", "20", "--quiet"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let train = std::fs::read_to_string(dir.path().join("train.csv")).unwrap();
    let test = std::fs::read_to_string(dir.path().join("test.csv")).unwrap();
    assert_eq!(train.lines().count(), 51); // header + records
    assert_eq!(test.lines().count(), 21);
}

#[test]
fn experiment_emits_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let status = pfr()
        .args(["experiment", "--quiet"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["report.json", "runs.csv", "grid.csv"] {
        assert!(out.join(name).exists(), "missing {}", name);
    }
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 7"));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(runs.lines().next().unwrap().starts_with("run,seed,method,gamma,d,auc"));
    assert_eq!(runs.lines().count(), 3); // header + pfr + original
}

#[test]
fn fit_then_transform_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let fit_out = dir.path().join("fit");
    assert!(pfr()
        .args(["fit", "--quiet"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&fit_out)
        .status()
        .unwrap()
        .success());
    let model = fit_out.join("model.json");
    assert!(model.exists());

    let transform_out = dir.path().join("transform");
    assert!(pfr()
        .args(["transform", "--quiet"])
        .arg("--config")
        .arg(&config)
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&transform_out)
        .status()
        .unwrap()
        .success());
    let embedding = std::fs::read_to_string(transform_out.join("embedding.csv")).unwrap();
    assert_eq!(embedding.lines().count(), 81); // header + test records
    assert!(embedding.lines().next().unwrap().starts_with("id,z0"));

    let eval_out = dir.path().join("eval");
    assert!(pfr()
        .args(["evaluate", "--quiet"])
        .arg("--config")
        .arg(&config)
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&eval_out)
        .status()
        .unwrap()
        .success());
    let report = std::fs::read_to_string(eval_out.join("report.json")).unwrap();
    assert!(report.contains("\"pfr\""));
    assert!(report.contains("\"original\""));
}

#[test]
fn build_graph_emits_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("graphs");
    assert!(pfr()
        .args(["build-graph", "--quiet"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let wx = std::fs::read_to_string(out.join("wx.csv")).unwrap();
    assert!(wx.lines().next().unwrap().starts_with("i,j,weight"));
    assert!(wx.lines().count() > 1);
    assert!(out.join("wf.csv").exists());
    assert!(out.join("report.json").exists());
}

#[test]
fn sweep_gamma_emits_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("sweep");
    assert!(pfr()
        .args(["sweep-gamma", "--quiet", "--gammas", "0.0,1.0"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.lines().next().unwrap().starts_with("parameter,value,metric"));
    assert!(sweep.contains("gamma,0.000000"));
    assert!(sweep.contains("gamma,1.000000"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dataset": {"source": "synthetic"}}"#).unwrap();
    let status = pfr()
        .args(["experiment", "--quiet"])
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    let text = r#"{
        "dataset": {
            "source": "csv",
            "train_path": "/nonexistent/train.csv",
            "schema": {"label_column": "y", "group_column": "s", "categorical_columns": []}
        },
        "fairness": {"source": "oracle_pairs", "k": 10, "budget": 100},
        "grid": {"gammas": [0.5], "dims": [1]},
        "split": {"folds": 2, "runs": 1}
    }"#;
    std::fs::write(&path, text).unwrap();
    let status = pfr()
        .args(["experiment", "--quiet"])
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    assert!(pfr()
        .args(["experiment", "--quiet", "--seed", "99"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 99"));
}
