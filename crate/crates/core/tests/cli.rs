mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FAST: &[&str] = &[
    "--set",
    "resize.width=32",
    "--set",
    "resize.height=32",
    "--set",
    "forest.trees=10",
    "--set",
    "svm.epochs=20",
];

fn albp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_albp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_with(dataset: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--dataset", path(dataset), "--out", path(out)];
    args.extend_from_slice(FAST);
    args.extend_from_slice(extra);
    albp(&args)
}

#[test]
fn full_run_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    common::write_texture_dataset(&data, 3, 6, 24);
    let o = run_with(&data, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    for tag in ["lbp", "albp"] {
        let base = out.join(tag);
        assert!(base.join("features.csv").is_file());
        assert!(base.join("split.json").is_file());
        for id in [
            "random_forest",
            "decision_tree",
            "naive_bayes",
            "knn",
            "svm",
            "ensemble",
        ] {
            assert!(base.join("models").join(format!("{id}.json")).is_file(), "{tag}/{id}");
        }
        assert!(base.join("models/train.log").is_file());
        for id in [
            "random_forest",
            "decision_tree",
            "naive_bayes",
            "knn",
            "svm",
            "soft_vote",
        ] {
            assert!(base.join("reports").join(format!("{id}.json")).is_file(), "{tag}/{id}");
        }
    }
    assert_eq!(fs::read_dir(out.join("preprocessed/class1")).unwrap().count(), 6);
    let table = fs::read_to_string(out.join("comparison.txt")).unwrap();
    assert_eq!(table.matches("Soft Voting").count(), 2 * (1 + 3));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["images"], 18);
    assert_eq!(manifest["stage_seconds"].as_array().unwrap().len(), 5);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    common::write_texture_dataset(&data, 2, 5, 20);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run_with(&data, &a, &["--threads", "1"]).status.success());
    assert!(run_with(&data, &b, &["--threads", "4"]).status.success());
    for rel in [
        "lbp/features.csv",
        "albp/features.csv",
        "comparison.json",
        "albp/models/random_forest.json",
    ] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn stepwise_commands_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    common::write_texture_dataset(&data, 2, 5, 16);
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# toy run\ndataset.root = {}\noutput.dir = {}\ndescriptor = albp\nalbp.beta = 0.2\nclassifiers = nb,knn\nknn.k = 3\n",
            data.display(),
            out.display()
        ),
    )
    .unwrap();
    let c = path(&cfg);
    for cmd in ["extract", "train", "evaluate"] {
        let o = albp(&[cmd, "--config", c]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!out.join("lbp").exists());
    let reports: Vec<serde_json::Value> =
        serde_json::from_slice(&fs::read(out.join("comparison.json")).unwrap()).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r["classifier"].as_str().unwrap()).collect();
    assert_eq!(names, ["Naive Bayes", "K-NN", "Soft Voting"]);
    assert!(reports.iter().all(|r| r["descriptor"] == "ALBP"));
}

#[test]
fn usage_errors_exit_with_1() {
    assert_eq!(albp(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(albp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(albp(&["run", "--set", "knn.kk=3"]).status.code(), Some(1));
    assert_eq!(albp(&["run", "--beta", "-1"]).status.code(), Some(1));
    // No dataset configured at all.
    assert_eq!(albp(&["run"]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let o = run_with(&missing, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("preprocess stage"));
}

#[test]
fn class_mismatch_and_corrupt_models_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let three = dir.path().join("three");
    let two = dir.path().join("two");
    common::write_texture_dataset(&three, 3, 4, 16);
    common::write_texture_dataset(&two, 2, 4, 16);
    let out3 = dir.path().join("out3");
    let out2 = dir.path().join("out2");
    for (data, out) in [(&three, &out3), (&two, &out2)] {
        let o = albp(&[
            "extract",
            "--dataset",
            path(data),
            "--out",
            path(out),
            "--descriptor",
            "lbp",
        ]);
        assert!(o.status.success());
    }
    let o = albp(&[
        "train",
        "--out",
        path(&out3),
        "--descriptor",
        "lbp",
        "--set",
        "classifiers=nb",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let models = out3.join("lbp/models");
    let features2 = out2.join("lbp/features.csv");
    let o = albp(&[
        "evaluate",
        "--features",
        path(&features2),
        "--models",
        path(&models),
        "--set",
        "classifiers=nb",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("class set mismatch"));

    let nb = models.join("naive_bayes.json");
    let text = fs::read(&nb).unwrap();
    fs::write(&nb, &text[..text.len() / 2]).unwrap();
    let o = albp(&[
        "evaluate",
        "--out",
        path(&out3),
        "--descriptor",
        "lbp",
        "--set",
        "classifiers=nb",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt model"));
}

#[test]
fn beta_sweep_produces_one_table_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    common::write_texture_dataset(&data, 2, 5, 16);
    let o = run_with(
        &data,
        &out,
        &[
            "--descriptor",
            "albp",
            "--beta-sweep",
            "0.05,0.1,0.2",
            "--set",
            "classifiers=nb",
            "--set",
            "ensemble=false",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<serde_json::Value> =
        serde_json::from_slice(&fs::read(out.join("comparison.json")).unwrap()).unwrap();
    let labels: Vec<&str> = reports.iter().map(|r| r["descriptor"].as_str().unwrap()).collect();
    assert_eq!(labels, ["ALBP(beta=0.05)", "ALBP(beta=0.1)", "ALBP(beta=0.2)"]);
    for tag in ["albp-b0.05", "albp-b0.1", "albp-b0.2"] {
        assert!(out.join(tag).join("reports/naive_bayes.json").is_file(), "{tag}");
    }
}
