use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hatebench::corpus::{write_dataset_auto, DatasetBundle, Label, TweetRecord};
use hatebench::fixtures::synthetic_separable;

fn repo_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn hatebench(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hatebench"))
        .env("HATE_HARNESS_DATA_DIR", data_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn small_data() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_dataset_auto(&synthetic_separable(90, 4), &dir.path().join("sep.csv")).unwrap();
    write_dataset_auto(&synthetic_separable(60, 5), &dir.path().join("sep2.jsonl")).unwrap();
    dir
}

#[test]
fn stats_reads_data_dir_from_env() {
    let out = ok(&hatebench(&repo_data(), &["stats"]));
    assert!(out.contains("covid-hate-2022\thate=497\tnon_hate=1538\ttotal=2035\tportion=0.24/0.76"));
    assert!(out.contains("covid-hate\thate=429\tnon_hate=1861\ttotal=2290"));
    assert!(out.contains("covid-hate-con\thate=926\tnon_hate=3399\ttotal=4325"));
    assert!(out.contains("hateval\thate=7566\tnon_hate=10434\ttotal=18000"));
}

#[test]
fn stats_json() {
    let out = ok(&hatebench(&repo_data(), &["stats", "--json", "covid-hate"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["dataset"], "covid-hate");
    assert_eq!(v["n_hate"], 429);
}

#[test]
fn trim_and_augment_reproduce_deployed_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let trimmed = tmp.path().join("trim.csv");
    let removed = tmp.path().join("removed.csv");
    let out = ok(&hatebench(
        &repo_data(),
        &[
            "trim",
            "covid-hate-2022",
            "-o",
            trimmed.to_str().unwrap(),
            "--report",
            removed.to_str().unwrap(),
        ],
    ));
    assert!(out.contains("415 hate / 437 non-hate / 852 total"), "{out}");
    let report = std::fs::read_to_string(&removed).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some("id,rule"));
    assert_eq!(lines.clone().count(), 1183);
    assert_eq!(
        lines
            .filter(|l| l.ends_with(",USERNAME_ONLY_MATCH"))
            .count(),
        100
    );

    let agu = tmp.path().join("agu.csv");
    let out = ok(&hatebench(
        &repo_data(),
        &[
            "augment",
            "covid-hate-2022",
            "--factor",
            "2",
            "-o",
            agu.to_str().unwrap(),
        ],
    ));
    assert!(
        out.contains("994 hate / 1538 non-hate / 2532 total"),
        "{out}"
    );
}

#[test]
fn clean_and_split_accept_file_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.csv");
    let b = DatasetBundle::new(
        "in",
        vec![
            TweetRecord::labeled("1", "@user hello https://x.co #Tag 😀 world", Label::Hate),
            TweetRecord::labeled("2", "plain", Label::NonHate),
            TweetRecord::labeled("3", "again", Label::NonHate),
        ],
        "",
    )
    .unwrap();
    write_dataset_auto(&b, &input).unwrap();
    let cleaned = tmp.path().join("clean.csv");
    ok(&hatebench(
        tmp.path(),
        &[
            "clean",
            input.to_str().unwrap(),
            "-o",
            cleaned.to_str().unwrap(),
        ],
    ));
    let text = std::fs::read_to_string(&cleaned).unwrap();
    assert!(text.contains(",hello world,"), "{text}");

    let out_dir = tmp.path().join("split");
    let out = ok(&hatebench(
        tmp.path(),
        &[
            "split",
            input.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--seed",
            "3",
        ],
    ));
    assert_eq!(out.lines().count(), 3);
    assert!(out_dir.join("in-test.csv").exists());
}

#[test]
fn lexicon_export_is_tab_separated() {
    let out = ok(&hatebench(&repo_data(), &["lexicon"]));
    assert_eq!(out.lines().count(), 44);
    for line in out.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3, "{line}");
        assert!(fields[2] == "true" || fields[2] == "false");
    }
    assert!(out.contains("kungflu\tHATE_CHINA\ttrue"));
}

#[test]
fn train_writes_runs_jsonl() {
    let data = small_data();
    let out_dir = data.path().join("out");
    let config = data.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            "dataset = \"sep\"\ntest-datasets = [\"sep\", \"sep2\"]\noutput-dir = {:?}\n[backend]\nname = \"mock\"\ndim = 4\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = ok(&hatebench(
        data.path(),
        &[
            "train",
            "--config",
            config.to_str().unwrap(),
            "--seeds",
            "1,2",
        ],
    ));
    assert_eq!(out.matches("(4 epochs)").count(), 2);
    let runs = std::fs::read_to_string(out_dir.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 2);
    for line in runs.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 2);
        assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    }
    let table = ok(&hatebench(
        data.path(),
        &["report", "--output-dir", out_dir.to_str().unwrap()],
    ));
    assert!(table.starts_with("| Training set | Technique | Test set | Accuracy | MCC |"));
}

#[test]
fn unknown_dataset_is_a_config_error() {
    let data = small_data();
    let config = data.path().join("bad.toml");
    std::fs::write(&config, "dataset = \"nope\"\n").unwrap();
    let out = hatebench(
        data.path(),
        &["train", "--config", config.to_str().unwrap()],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown dataset `nope`"));
}

#[test]
fn grid_runs_every_cell() {
    let data = small_data();
    let out_dir = data.path().join("grid-out");
    let config = data.path().join("grid.toml");
    std::fs::write(
        &config,
        format!(
            "dataset = \"sep\"\noutput-dir = {:?}\n[backend]\nname = \"mock\"\ndim = 4\nn-layers = 12\n\
             [grid]\ndatasets = [\"sep\", \"sep2\", \"missing\"]\nstrategies = [{{ strategy = \"none\" }}, {{ strategy = \"unfreeze\", strategy-params = {{ layers = 4 }} }}]\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = ok(&hatebench(
        data.path(),
        &[
            "grid",
            "--config",
            config.to_str().unwrap(),
            "--workers",
            "2",
        ],
    ));
    assert!(out.starts_with("6 cells, 2 failed"), "{out}");
    let runs = std::fs::read_to_string(out_dir.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 6);
}

#[test]
fn eval_scores_prediction_file() {
    let tmp = tempfile::tempdir().unwrap();
    let b = DatasetBundle::new(
        "tiny",
        (0..20)
            .map(|i| {
                let l = if i < 8 { Label::Hate } else { Label::NonHate };
                TweetRecord::labeled(format!("r{i}"), "x", l)
            })
            .collect(),
        "",
    )
    .unwrap();
    write_dataset_auto(&b, &tmp.path().join("tiny.csv")).unwrap();
    // tp 5, fn 3, fp 2, tn 10.
    let mut preds = String::from("id,predicted\n");
    for i in 0..20 {
        let hate = i < 5 || (8..10).contains(&i);
        let cell = match (hate, i % 2) {
            (true, 0) => "hate",
            (true, _) => "1",
            (false, 0) => "non_hate",
            (false, _) => "0",
        };
        preds.push_str(&format!("r{i},{cell}\n"));
    }
    let pred_path = tmp.path().join("preds.csv");
    std::fs::write(&pred_path, preds).unwrap();
    let md = tmp.path().join("t.md");
    let out = ok(&hatebench(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "tiny",
            "--predictions",
            pred_path.to_str().unwrap(),
            "--markdown",
            md.to_str().unwrap(),
        ],
    ));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["accuracy"], 0.75);
    assert!((v["mcc"].as_f64().unwrap() - 0.470_756_541_762_004_1).abs() < 1e-12);
    assert_eq!(v["confusion"]["fn"], 3);
    assert!(std::fs::read_to_string(md).unwrap().contains("| tiny |"));
}
