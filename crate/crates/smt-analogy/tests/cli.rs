//! End-to-end CLI checks: the full subcommand flow on a small corpus plus
//! the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_smt-analogy")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn full_flow_produces_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let corpus = path_str(dir.path(), "corpus.json");
    let model = path_str(dir.path(), "model.json");
    let pred = path_str(dir.path(), "pred.json");
    let gold = path_str(dir.path(), "gold.json");
    let metrics = path_str(dir.path(), "metrics.json");
    let pgm = path_str(dir.path(), "pair.pgm");

    let steps: &[&[&str]] = &[
        &[
            "gen",
            "--out",
            &corpus,
            "--num",
            "4",
            "--depth-min",
            "2",
            "--depth-max",
            "3",
            "--distractor",
            "0.2",
            "--relabel",
            "0.3",
            "--seed",
            "11",
        ],
        &[
            "train", "--corpus", &corpus, "--out", &model, "--k", "2", "--dim", "16", "--margin",
            "1.0", "--steps", "50", "--lr", "1e-3", "--seed", "2",
        ],
        &[
            "infer",
            "--model",
            &model,
            "--corpus",
            &corpus,
            "--out",
            &pred,
            "--lambda1",
            "1e-3",
            "--lambda2",
            "1e-1",
            "--lambda3",
            "1e-3",
            "--lr",
            "1e-3",
            "--iters",
            "80",
            "--tau",
            "0.5",
            "--seed",
            "3",
        ],
        &["oracle", "--corpus", &corpus, "--out", &gold],
        &["eval", "--pred", &pred, "--gold", &gold, "--out", &metrics],
        &[
            "heatmap", "--pred", &pred, "--pair", "p00002", "--out", &pgm,
        ],
    ];
    for args in steps {
        let out = run(args);
        assert!(
            out.status.success(),
            "step {:?} failed: {}",
            args[0],
            String::from_utf8_lossy(&out.stderr)
        );
    }

    let report = smt_analogy::io::read_metrics_report(Path::new(&metrics)).unwrap();
    assert_eq!(report.pairs.len(), 4);
    assert!(report.failures.is_empty());

    let pgm_bytes = std::fs::read(&pgm).unwrap();
    assert!(pgm_bytes.starts_with(b"P5\n"));

    let predictions = smt_analogy::io::read_predictions(Path::new(&pred)).unwrap();
    assert_eq!(predictions.len(), 4);
    for p in &predictions {
        assert!(p.binary.is_one_to_one());
    }
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["gen", "--out"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));

    // Parseable flags with invalid values are usage errors too.
    let dir = TempDir::new().unwrap();
    let corpus = path_str(dir.path(), "c.json");
    let out = run(&[
        "gen",
        "--out",
        &corpus,
        "--num",
        "1",
        "--depth-min",
        "0",
        "--depth-max",
        "3",
        "--distractor",
        "0.0",
        "--relabel",
        "0.0",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = path_str(dir.path(), "missing.json");
    let model = path_str(dir.path(), "model.json");
    let out = run(&[
        "train", "--corpus", &missing, "--out", &model, "--k", "2", "--dim", "8", "--margin",
        "1.0", "--steps", "1", "--lr", "1e-3", "--seed", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let gold = path_str(dir.path(), "gold.json");
    let out = run(&[
        "oracle",
        "--corpus",
        broken.to_str().unwrap(),
        "--out",
        &gold,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gen"));
}

#[test]
fn oracle_reports_oversized_pairs_and_continues() {
    let dir = TempDir::new().unwrap();
    let corpus = path_str(dir.path(), "corpus.json");
    let gold = path_str(dir.path(), "gold.json");
    let out = run(&[
        "gen",
        "--out",
        &corpus,
        "--num",
        "3",
        "--depth-min",
        "2",
        "--depth-max",
        "3",
        "--distractor",
        "0.2",
        "--relabel",
        "0.0",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());

    // Force a tiny size limit so every pair is skipped but the run succeeds.
    let out = run(&[
        "oracle",
        "--corpus",
        &corpus,
        "--out",
        &gold,
        "--max-base",
        "1",
        "--max-target",
        "1",
    ]);
    assert!(out.status.success());
    let instances = smt_analogy::io::read_corpus(Path::new(&gold)).unwrap();
    assert!(instances.iter().all(|i| i.gold.is_none()));
}

#[test]
fn missing_pair_in_heatmap_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let corpus = path_str(dir.path(), "corpus.json");
    let model = path_str(dir.path(), "model.json");
    let pred = path_str(dir.path(), "pred.json");
    for args in [
        vec![
            "gen",
            "--out",
            &corpus,
            "--num",
            "1",
            "--depth-min",
            "2",
            "--depth-max",
            "2",
            "--distractor",
            "0.0",
            "--relabel",
            "0.0",
            "--seed",
            "1",
        ],
        vec![
            "train", "--corpus", &corpus, "--out", &model, "--k", "2", "--dim", "8", "--margin",
            "1.0", "--steps", "5", "--lr", "1e-3", "--seed", "1",
        ],
        vec![
            "infer", "--model", &model, "--corpus", &corpus, "--out", &pred, "--iters", "5",
            "--seed", "1",
        ],
    ] {
        let args: Vec<&str> = args.iter().map(|s| &**s).collect();
        assert!(run(&args).status.success());
    }
    let missing_path: PathBuf = dir.path().join("x.pgm");
    let out = run(&[
        "heatmap",
        "--pred",
        &pred,
        "--pair",
        "nope",
        "--out",
        missing_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
