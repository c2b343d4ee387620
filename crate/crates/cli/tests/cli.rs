use std::path::Path;
use std::process::{Command, Output};

use reformcause_cli::{parse_args, Command as Verb};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reformcause"))
        .current_dir(dir)
        .env_remove("REFORMCAUSE_JOBS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bin(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn parse_examples() {
    let cli = parse_args(["reformcause", "synth", "--n", "1000", "--out", "c.jsonl"]).unwrap();
    match cli.command {
        Verb::Synth(a) => {
            assert_eq!(a.n, Some(1000));
            assert_eq!(a.out, Path::new("c.jsonl"));
        }
        other => panic!("{other:?}"),
    }
    let cli = parse_args([
        "reformcause",
        "eval",
        "--corpus",
        "c.jsonl",
        "--families",
        "session,reformulation",
        "--report-out",
        "r.json",
    ])
    .unwrap();
    match cli.command {
        Verb::Eval(a) => {
            assert_eq!(a.seed, 42);
            assert_eq!(a.k, 10);
            assert_eq!(a.space.families.as_deref(), Some("session,reformulation"));
        }
        other => panic!("{other:?}"),
    }
    assert!(parse_args(["reformcause", "frobnicate"]).is_err());
    assert!(parse_args(["reformcause", "synth", "--out", "c", "--bogus"]).is_err());
    assert!(parse_args([
        "reformcause",
        "train",
        "--corpus",
        "c",
        "--model-out",
        "m",
        "--c",
        "1",
        "--grid",
        "1"
    ])
    .is_err());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bin(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(d, &["synth"]).status.code(), Some(2));
    let out = bin(d, &["eval", "--corpus", "missing.jsonl", "--report-out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));
    let out = bin(d, &["synth", "--out", "no/such/dir/c.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("r.json").exists());
}

#[test]
fn pipeline_errors_exit_1_and_name_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "20", "--out", "c.jsonl"]);
    let text = std::fs::read_to_string(d.join("c.jsonl")).unwrap();
    let broken = text.replacen("\"intent\":\"", "\"intent\":\"teleport_", 1);
    std::fs::write(d.join("bad.jsonl"), broken).unwrap();
    let out = bin(d, &["featurize", "--corpus", "bad.jsonl", "--out", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syn000000") && err.contains("teleport_"), "{err}");
    assert!(!d.join("x.jsonl").exists());
}

#[test]
fn synth_filter_featurize_train_predict_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let summary = ok(d, &["synth", "--n", "150", "--seed", "9", "--out", "c.jsonl"]);
    assert!(summary.contains("150 records"), "{summary}");
    let before = std::fs::read(d.join("c.jsonl")).unwrap();
    assert_eq!(before.iter().filter(|&&b| b == b'\n').count(), 150);

    let summary = ok(
        d,
        &["filter", "--in", "c.jsonl", "--out", "f.jsonl", "--max-dist", "0.2"],
    );
    assert!(summary.starts_with("filter: kept "), "{summary}");
    let kept = std::fs::read_to_string(d.join("f.jsonl")).unwrap().lines().count();
    assert!(kept < 150);

    ok(
        d,
        &[
            "featurize",
            "--corpus",
            "c.jsonl",
            "--families",
            "session,asr",
            "--out",
            "x.jsonl",
        ],
    );
    let names: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("x.jsonl.names.json")).unwrap()).unwrap();
    let n_names = names["feature_names"].as_array().unwrap().len();
    let first: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(d.join("x.jsonl"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(first["features"].as_array().unwrap().len(), n_names);
    assert!(first["label"].is_string() && first["id"] == "syn000000");

    ok(
        d,
        &[
            "train",
            "--corpus",
            "c.jsonl",
            "--grid",
            "0.1,1",
            "--model-out",
            "m.json",
        ],
    );
    let model: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    for key in [
        "classes",
        "feature_names",
        "weights",
        "bias",
        "hyper_c",
        "seed",
        "standardizer",
        "space",
    ] {
        assert!(model.get(key).is_some(), "model lacks {key}");
    }

    ok(
        d,
        &[
            "predict", "--model", "m.json", "--corpus", "c.jsonl", "--out", "p.jsonl",
        ],
    );
    let preds = std::fs::read_to_string(d.join("p.jsonl")).unwrap();
    assert_eq!(preds.lines().count(), 150);
    let row: serde_json::Value = serde_json::from_str(preds.lines().next().unwrap()).unwrap();
    assert!(row["predicted_label"].is_string());
    assert_eq!(row["scores"].as_object().unwrap().len(), 4);

    let shown = ok(d, &["weights", "--models", "m.json", "m.json", "--top", "1"]);
    assert!(shown.contains("over 2 models") && shown.contains("LG error"), "{shown}");

    assert_eq!(std::fs::read(d.join("c.jsonl")).unwrap(), before);
    let out = bin(d, &["filter", "--in", "c.jsonl", "--out", "c.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read(d.join("c.jsonl")).unwrap(), before);
}

#[test]
fn eval_and_ablate_write_json_and_text() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "160", "--out", "c.jsonl"]);
    let summary = ok(
        d,
        &[
            "eval",
            "--corpus",
            "c.jsonl",
            "--families",
            "session,reformulation",
            "--k",
            "4",
            "--grid",
            "1",
            "--report-out",
            "r.json",
        ],
    );
    assert!(summary.contains("macro-F1") && summary.contains("r.json"), "{summary}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 4);
    assert_eq!(
        report["config"]["families"],
        serde_json::json!(["session", "reformulation"])
    );
    let text = std::fs::read_to_string(d.join("r.txt")).unwrap();
    assert!(text.contains("Gold \\ Predict"));

    ok(
        d,
        &[
            "ablate",
            "--corpus",
            "c.jsonl",
            "--addons",
            "asr,nlu+lg",
            "--k",
            "4",
            "--grid",
            "1",
            "--report-out",
            "ab.json",
        ],
    );
    let text = std::fs::read_to_string(d.join("ab.txt")).unwrap();
    for row in ["Baseline (B.)", "Proposed", "B. + ASR", "B. + NLU + LG"] {
        assert!(text.contains(row), "missing {row}");
    }
    let shown = ok(d, &["weights", "--report", "ab.json"]);
    assert!(shown.contains("over 4 models"), "{shown}");
    let shown = ok(d, &["weights", "--report", "r.json", "--top", "3", "--out", "w.txt"]);
    assert_eq!(
        std::fs::read_to_string(d.join("w.txt")).unwrap().lines().count(),
        shown.lines().count() - 1
    );
}

#[test]
fn synth_config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut config = reformcause::synth::default_config();
    config.n = 12;
    config.seed = 5;
    std::fs::write(d.join("cfg.json"), serde_json::to_string(&config).unwrap()).unwrap();
    let summary = ok(d, &["synth", "--config", "cfg.json", "--out", "a.jsonl"]);
    assert!(summary.contains("12 records (seed 5)"), "{summary}");
    let expected = reformcause::synth::generate_corpus(&config).unwrap().to_jsonl();
    assert_eq!(std::fs::read_to_string(d.join("a.jsonl")).unwrap(), expected);
    let summary = ok(
        d,
        &[
            "synth", "--config", "cfg.json", "--n", "3", "--seed", "6", "--out", "b.jsonl",
        ],
    );
    assert!(summary.contains("3 records (seed 6)"), "{summary}");
}
