use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use advwalk::synthetic::{generate, SyntheticConfig};

fn advwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_advwalk"))
        .args(args)
        .env_remove("ADVWALK_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a small labelled graph as `graph.txt` and `labels.txt`.
fn dataset(dir: &Path) {
    let (g, labels) = generate(&SyntheticConfig {
        class_sizes: vec![40, 30, 30],
        edges: 320,
        homophily: 0.85,
        degree_exponent: 2.6,
        max_propensity: 15.0,
        seed: 2,
    })
    .unwrap();
    g.write_edge_list(dir.join("graph.txt")).unwrap();
    let mut text = String::new();
    for (v, c) in labels.labelled() {
        text.push_str(&format!("{}\t{}\n", g.name(v), labels.classes()[c as usize]));
    }
    fs::write(dir.join("labels.txt"), text).unwrap();
}

const FAST: &[&str] = &["--dim", "8", "--epochs", "3", "--pretrain", "1", "--batch-size", "64", "--lr", "0.01"];

#[test]
fn preprocess_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    fs::write(&raw, "# citations\nb a\na b\nc c\nc a\nd e\n").unwrap();
    let once = dir.path().join("once.txt");
    let twice = dir.path().join("twice.txt");
    let out = advwalk(&["preprocess", p(&raw), p(&once)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(code(&advwalk(&["preprocess", p(&once), p(&twice)])), 0);
    assert_eq!(fs::read_to_string(&once).unwrap(), fs::read_to_string(&twice).unwrap());
    let map = fs::read_to_string(dir.path().join("once.txt.nodes")).unwrap();
    assert_eq!(map.lines().count(), 5);
}

#[test]
fn bad_input_exits_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out = advwalk(&["preprocess", p(&empty), p(&dir.path().join("o.txt"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("empty graph"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a b\nc\n").unwrap();
    let out = advwalk(&["preprocess", p(&bad), p(&dir.path().join("o.txt"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains(":2:"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&advwalk(&["train", "--no-such-flag"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("x.conf");
    fs::write(&conf, "graph = g.txt\nmystery = 4\n").unwrap();
    let out = advwalk(&["train", "--config", p(&conf)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("mystery"));
    // Output directory missing entirely.
    assert_eq!(code(&advwalk(&["train", "--graph", "g.txt"])), 1);
    assert_eq!(code(&advwalk(&["train", "--graph", "g.txt", "--out", "o", "--method", "sgd"])), 1);
}

#[test]
fn train_outputs_and_replay_from_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let run1 = dir.path().join("run1");
    let graph = dir.path().join("graph.txt");
    let mut args = vec!["train", "--graph", p(&graph), "--out", p(&run1), "--method", "advt"];
    args.extend_from_slice(FAST);
    let out = advwalk(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let log = fs::read_to_string(run1.join("loss.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,clean_loss,reg_loss,zero_grad_count");
    assert_eq!(log.lines().count(), 4);
    let emb = fs::read_to_string(run1.join("embeddings.txt")).unwrap();
    assert_eq!(emb.lines().next().unwrap(), "100 8");
    assert!(run1.join("context.txt").exists());

    let run2 = dir.path().join("run2");
    let out = advwalk(&["train", "--config", p(&run1.join("train.conf")), "--out", p(&run2)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for file in ["embeddings.txt", "context.txt", "loss.csv"] {
        assert_eq!(fs::read(run1.join(file)).unwrap(), fs::read(run2.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn divergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let out = advwalk(&[
        "train", "--graph", p(&dir.path().join("graph.txt")), "--out", p(&dir.path().join("r")),
        "--dim", "8", "--epochs", "2", "--pretrain", "0", "--lr", "1e200",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("non-finite"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let target = dir.path().join("from-env");
    let graph = dir.path().join("graph.txt");
    let mut args = vec!["train", "--graph", p(&graph)];
    args.extend_from_slice(FAST);
    let out = Command::new(env!("CARGO_BIN_EXE_advwalk"))
        .args(&args)
        .env("ADVWALK_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(target.join("embeddings.txt").exists());
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn link_prediction_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let split = dir.path().join("split");
    let out = advwalk(&["split-lp", "--graph", p(&dir.path().join("graph.txt")), "--out", p(&split), "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pairs = fs::read_to_string(split.join("test_pairs.txt")).unwrap();
    assert_eq!(pairs.lines().filter(|l| l.ends_with("\t1")).count(), 64);
    assert_eq!(pairs.lines().filter(|l| l.ends_with("\t0")).count(), 128);

    let run = dir.path().join("run");
    let residual = split.join("train_edges.txt");
    let mut args = vec!["train", "--graph", p(&residual), "--weighted", "true", "--out", p(&run)];
    args.extend_from_slice(FAST);
    assert_eq!(code(&advwalk(&args)), 0);

    let eval = dir.path().join("eval");
    let out = advwalk(&[
        "eval", "lp", "--embeddings", p(&run.join("embeddings.txt")), "--graph", p(&split.join("train_edges.txt")),
        "--test-pairs", p(&split.join("test_pairs.txt")), "--out", p(&eval), "--seeds", "0,1,2", "--dataset", "toy",
        "--jobs", "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = csv_rows(&eval.join("lp_metrics.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][..3], ["toy", "dwns", "lp"]);
    let agg = csv_rows(&eval.join("lp_aggregate.csv"));
    assert_eq!(agg.len(), 1);
    assert_eq!(agg[0][5], "3");
}

#[test]
fn classification_and_attack_grids() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let graph = dir.path().join("graph.txt");
    let run = dir.path().join("run");
    let mut args = vec!["train", "--graph", p(&graph), "--out", p(&run)];
    args.extend_from_slice(FAST);
    assert_eq!(code(&advwalk(&args)), 0);
    let emb = run.join("embeddings.txt");
    let labels = dir.path().join("labels.txt");

    let eval = dir.path().join("eval");
    let out = advwalk(&[
        "eval", "nc", "--embeddings", p(&emb), "--graph", p(&graph), "--labels", p(&labels), "--out", p(&eval),
        "--ratios", "0.1,0.5", "--seeds", "0,1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(csv_rows(&eval.join("nc_metrics.csv")).len(), 4);
    assert_eq!(csv_rows(&eval.join("nc_aggregate.csv")).len(), 2);

    // The resolved config replays to identical metrics.
    let again = dir.path().join("again");
    let out = advwalk(&["eval", "nc", "--config", p(&eval.join("nc.conf")), "--out", p(&again)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(eval.join("nc_metrics.csv")).unwrap(), fs::read(again.join("nc_metrics.csv")).unwrap());

    let out = advwalk(&[
        "eval", "attack", "--embeddings", p(&emb), "--graph", p(&graph), "--labels", p(&labels), "--out", p(&eval),
        "--eps-grid", "0,1", "--mode", "both", "--seeds", "0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = csv_rows(&eval.join("attack_metrics.csv"));
    assert_eq!(rows.len(), 4);
    let at_zero: Vec<&str> = rows.iter().filter(|r| r[3] == "0").map(|r| r[6].as_str()).collect();
    assert_eq!(at_zero.len(), 2);
    assert_eq!(at_zero[0], at_zero[1]);
}

#[test]
fn missing_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = advwalk(&[
        "eval", "nc", "--embeddings", "nope.txt", "--graph", "nope.txt", "--labels", "nope", "--out", p(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    let out = advwalk(&["eval", "lp", "--out", p(dir.path())]);
    assert_eq!(code(&out), 1);
}
