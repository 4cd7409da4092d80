use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aecqtl::cli::{Checkpoint, LOSS_CURVE_HEADER, SUMMARY_HEADER};
use aecqtl::read_aefv;

fn aecqtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aecqtl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = aecqtl(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_requested_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("blobs.aefv");
    ok(&["synth", "--dim", "512", "--per-class", "384", "--sep", "4", "--seed", "7", "--out", s(&out)]);
    let set = read_aefv(&out).unwrap();
    assert_eq!((set.len(), set.dim()), (768, 512));
    assert_eq!(set.class_sizes(), vec![384, 384]);

    let zero = dir.path().join("zero.aefv");
    ok(&["synth", "--dim", "4", "--per-class", "3", "--sep", "0", "--out", s(&zero)]);
    assert_eq!(read_aefv(&zero).unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(aecqtl(&["synth", "--dim", "4", "--per-class", "3", "--sep", "1"]).status.code(), Some(1));
    assert_eq!(
        aecqtl(&["train", "--model", "tlqnn", "--train", "a", "--test", "b", "--out-dir", "o", "--epochs", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(aecqtl(&["gradcheck", "--model", "resnet"]).status.code(), Some(1));
    assert_eq!(aecqtl(&[]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aefv");
    fs::write(&bad, "aefv,1,4,2,2\n0,1,2,3,4\n1,1,2,3\n").unwrap();
    let out = aecqtl(&["train", "--model", "tlqnn", "--train", s(&bad), "--test", s(&bad), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.aefv:3:"));
    let missing = dir.path().join("nope.txt");
    assert_eq!(aecqtl(&["eval", "--checkpoint", s(&missing), "--data", s(&bad)]).status.code(), Some(2));
}

#[test]
fn gradcheck_passes_and_fails_honestly() {
    for model in ["tlqnn", "tlqcnn"] {
        let out = ok(&["gradcheck", "--model", model, "--qubits", "5", "--layers", "2"]);
        assert!(out.contains("PASS"), "{out}");
    }
    let strict = aecqtl(&["gradcheck", "--model", "tlqnn", "--tolerance", "1e-12"]);
    assert_eq!(strict.status.code(), Some(3));
}

fn small_workflow(dir: &Path) -> (String, String) {
    let all = dir.join("all.aefv");
    let train = dir.join("train.aefv");
    let test = dir.join("test.aefv");
    ok(&["synth", "--dim", "16", "--per-class", "20", "--sep", "3", "--seed", "2", "--out", s(&all)]);
    ok(&[
        "split", "--input", s(&all), "--train-count", "12", "--test-count", "8", "--seed", "3",
        "--train-out", s(&train), "--test-out", s(&test),
    ]);
    (s(&train).to_owned(), s(&test).to_owned())
}

#[test]
fn train_and_eval_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = small_workflow(dir.path());
    let out_dir = dir.path().join("runs");
    let log = ok(&[
        "train", "--model", "tlqcnn", "--layers", "2", "--train", &train, "--test", &test,
        "--epochs", "3", "--repeats", "2", "--seed", "4", "--out-dir", s(&out_dir),
    ]);
    assert!(log.contains("parameters: quantum=57 classical=6 total=63"), "{log}");

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some(SUMMARY_HEADER));
    assert!(lines.next().unwrap().starts_with("tlqcnn,16,4,2,57,6,"));

    let curve = fs::read_to_string(out_dir.join("run_1/loss_curve.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some(LOSS_CURVE_HEADER));
    assert_eq!(curve.lines().count(), 4);
    let last_acc: f64 = curve.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();

    let ckpt = out_dir.join("run_1/checkpoint.txt");
    assert_eq!(Checkpoint::load(&ckpt).unwrap().seed, 5);
    let roc = dir.path().join("roc.csv");
    let eval = ok(&["eval", "--checkpoint", s(&ckpt), "--data", &test, "--roc", s(&roc)]);
    assert!(eval.contains(&format!("accuracy: {last_acc:.4}%")), "{eval} vs {last_acc}");

    let rows: Vec<Vec<f64>> = fs::read_to_string(&roc)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.first().map(|r| (r[1], r[2])), Some((0.0, 0.0)));
    assert_eq!(rows.last().map(|r| (r[1], r[2])), Some((1.0, 1.0)));
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1] && w[0][2] <= w[1][2]));
}

#[test]
fn checkpoints_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = small_workflow(dir.path());
    let out_dir = dir.path().join("runs");
    ok(&[
        "train", "--model", "tlqnn", "--layers", "1", "--train", &train, "--test", &test,
        "--epochs", "1", "--repeats", "1", "--out-dir", s(&out_dir),
    ]);
    let path = out_dir.join("run_0/checkpoint.txt");
    let original = fs::read(&path).unwrap();
    let copy = dir.path().join("copy.txt");
    Checkpoint::load(&path).unwrap().save(&copy).unwrap();
    assert_eq!(fs::read(&copy).unwrap(), original);
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = small_workflow(dir.path());
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        ok(&[
            "--workers", workers, "train", "--model", "tlqnn", "--layers", "1", "--train", &train,
            "--test", &test, "--epochs", "2", "--repeats", "1", "--out-dir", s(&out_dir),
        ]);
        (
            fs::read(out_dir.join("run_0/loss_curve.csv")).unwrap(),
            fs::read(out_dir.join("run_0/checkpoint.txt")).unwrap(),
        )
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
}
