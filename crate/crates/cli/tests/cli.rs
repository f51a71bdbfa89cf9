// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentburst")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = bin(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Training and test streams with planted bursts, written into `dir`.
fn fixture(dir: &Path) {
    std::fs::write(dir.join("seeds.txt"), "# planted\ntk\ntkx\n").unwrap();
    ok(
        dir,
        &[
            "synth",
            "--output",
            "train.jsonl",
            "--truth",
            "train.csv",
            "--duration",
            "1800",
            "--rate",
            "20",
            "--seed",
            "1",
            "--burst",
            "600:60:20:tk|tkx",
            "--burst",
            "1200:60:20:tk|tkx",
        ],
    );
    ok(
        dir,
        &[
            "synth",
            "--output",
            "test.jsonl",
            "--truth",
            "test.csv",
            "--duration",
            "900",
            "--rate",
            "20",
            "--seed",
            "2",
            "--burst",
            "480:60:20:ev|evx",
        ],
    );
}

fn tmp() -> (tempfile::TempDir, PathBuf) {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_path_buf();
    (d, p)
}

#[test]
fn version_reports_model_schema() {
    let (_g, dir) = tmp();
    let out = ok(&dir, &["--version"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model schema 1"), "{text}");
}

#[test]
fn usage_errors_exit_1_and_name_the_flag() {
    let (_g, dir) = tmp();
    let out = bin(&dir, &["detect", "--input", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));

    let out = bin(&dir, &["eval", "--series", "d.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--truth"));

    assert_eq!(bin(&dir, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&dir, &[]).status.code(), Some(1));
    assert_eq!(bin(&dir, &["baseline", "--method", "median", "--input", "x"]).status.code(), Some(1));
    assert_eq!(bin(&dir, &["train", "--exclude", "colour", "--model", "m.json"]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let (_g, dir) = tmp();
    std::fs::write(dir.join("model.json"), "{ not a model").unwrap();
    let out = bin(&dir, &["detect", "--model", "model.json", "--input", "missing.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&dir, &["baseline", "--method", "rawburst", "--input", "missing.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_values_yield_to_flags() {
    let (_g, dir) = tmp();
    fixture(&dir);
    std::fs::write(dir.join("run.conf"), "method = rawburst\ninput = test.jsonl\nk = 5\noutput = a.csv\n").unwrap();
    ok(&dir, &["baseline", "--config", "run.conf"]);
    ok(&dir, &["baseline", "--config", "run.conf", "--output", "b.csv", "--k", "3"]);
    let a = std::fs::read_to_string(dir.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.join("b.csv")).unwrap();
    // the first rows without an average are the warm-up
    let warm = |s: &str| s.lines().skip(1).take_while(|l| l.ends_with(",,")).count();
    assert_eq!((warm(&a), warm(&b)), (5, 3));

    std::fs::write(dir.join("bad.conf"), "window = 3\n").unwrap();
    assert_eq!(bin(&dir, &["baseline", "--config", "bad.conf"]).status.code(), Some(1));
}

#[test]
fn replay_summary_goes_to_stderr() {
    let (_g, dir) = tmp();
    fixture(&dir);
    let out = ok(&dir, &["features", "--input", "test.jsonl", "--output", "f.csv"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("replay: total=18000 emitted=18000"));
    let dump = std::fs::read_to_string(dir.join("f.csv")).unwrap();
    assert!(dump.starts_with("window_end_time,token,raw_"));
    assert!(dump.lines().count() > 10);
}

#[test]
fn full_pipeline_and_model_selection() {
    let (_g, dir) = tmp();
    fixture(&dir);
    let data = ["--input", "train.jsonl", "--truth", "train.csv", "--seeds", "seeds.txt"];
    let small = ["--n-trees", "32", "--folds", "3"];

    let mut args = vec!["gridsearch", "--output", "grid.json", "--svm-c-exp", "0:1", "--svm-gamma-exp", "-1:0"];
    args.extend(["--trees-exp", "3:4", "--features-exp", "1:1", "--folds", "3", "--save-training-set", "set.csv"]);
    args.extend(data);
    ok(&dir, &args);
    let grid: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("grid.json")).unwrap()).unwrap();
    assert_eq!(grid["svm_cells"].as_array().unwrap().len(), 4);
    assert_eq!(grid["forest_cells"].as_array().unwrap().len(), 2);

    ok(&dir, &["train", "--training-set", "set.csv", "--params", "grid.json", "--model", "m.json"]);
    ok(
        &dir,
        &[
            "train",
            "--training-set",
            "set.csv",
            "--n-trees",
            "32",
            "--exclude",
            "average_difference",
            "--model",
            "star.json",
        ],
    );
    let star: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("star.json")).unwrap()).unwrap();
    assert_eq!(star["columns"].as_array().unwrap().len(), 9);

    let mut args = vec!["ablate", "--training-set", "set.csv", "--output", "ablation.csv"];
    args.extend(small);
    ok(&dir, &args);
    let ablation = std::fs::read_to_string(dir.join("ablation.csv")).unwrap();
    assert_eq!(ablation.lines().count(), 1 + 1 + 8);

    ok(
        &dir,
        &[
            "selftrain",
            "--model",
            "m.json",
            "--training-set",
            "set.csv",
            "--input",
            "test.jsonl",
            "--output",
            "m2.json",
            "--n-trees",
            "32",
        ],
    );
    assert_eq!(
        bin(
            &dir,
            &[
                "selftrain",
                "--model",
                "star.json",
                "--training-set",
                "set.csv",
                "--input",
                "test.jsonl",
                "--output",
                "x.json"
            ]
        )
        .status
        .code(),
        Some(1)
    );

    ok(&dir, &["detect", "--model", "m.json", "--input", "test.jsonl", "--rho", "1", "--output", "d.jsonl"]);
    let log = std::fs::read_to_string(dir.join("d.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["warm_up"], true);

    ok(
        &dir,
        &[
            "baseline",
            "--method",
            "tokenburst",
            "--lexicon",
            "seeds.txt",
            "--input",
            "test.jsonl",
            "--output",
            "tb.csv",
        ],
    );
    let out = ok(
        &dir,
        &[
            "eval", "--series", "d.jsonl", "--series", "tb.csv", "--truth", "test.csv", "--truth", "test.csv", "--roc",
            "roc.csv", "--method", "mixed",
        ],
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let auc = summary["methods"]["mixed"]["composite_auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert!(summary["methods"]["mixed"]["events"]["d"].is_number());
    assert!(std::fs::read_to_string(dir.join("roc.csv")).unwrap().starts_with("threshold,fpr,tpr"));
}
