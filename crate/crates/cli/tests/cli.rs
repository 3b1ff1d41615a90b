use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use structvec::experiment::ExperimentReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_structvec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_arguments_prints_usage_and_exits_1() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage: structvec"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        run(&["nearest", "--model", "m", "--word", "w", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["train", "--corpus", "c"]).status.code(), Some(1));
    assert_eq!(
        run(&[
            "classify-train",
            "--arch",
            "cnn",
            "--model",
            "m",
            "--pairs",
            "p",
            "--output",
            "o"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn configuration_errors_exit_1_and_data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pairs");
    let corpus = core_fixture("golden.conllu");
    let bad_family = run(&[
        "extract-features",
        "--input",
        s(&corpus),
        "--output",
        s(&out),
        "--feat",
        "arc,bogus",
    ]);
    assert_eq!(bad_family.status.code(), Some(1));
    assert!(!out.exists());

    let missing = run(&[
        "extract-features",
        "--input",
        "/nonexistent/corpus.conll",
        "--output",
        s(&out),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/corpus.conll"));

    let garbage = dir.path().join("garbage.vec");
    std::fs::write(&garbage, "2 3\na 1 2\n").unwrap();
    assert_eq!(
        run(&["nearest", "--model", s(&garbage), "--word", "a"]).status.code(),
        Some(2)
    );
}

#[test]
fn help_is_printed_to_stdout_with_exit_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("extract-features"));
}

const HELP_PAGES: &[&[&str]] = &[
    &[],
    &["extract-features"],
    &["build-vocab"],
    &["train"],
    &["nearest"],
    &["classify-train"],
    &["classify-eval"],
    &["classify"],
    &["classify", "train"],
    &["classify", "eval"],
    &["experiment"],
];

#[test]
fn help_snapshots() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots");
    let update = std::env::var_os("STRUCTVEC_UPDATE_SNAPSHOTS").is_some();
    for page in HELP_PAGES {
        let mut args = page.to_vec();
        args.push("--help");
        let text = ok(&args);
        let name = if page.is_empty() {
            "structvec".to_string()
        } else {
            page.join(".")
        };
        let path = dir.join(format!("{name}.txt"));
        if update {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing snapshot {}", path.display()));
        assert_eq!(text, want, "help for {page:?} changed");
    }
}

/// Optional flags taking a value must show a default unless their absence
/// has a documented meaning.
#[test]
fn every_optional_flag_documents_its_default() {
    let no_default = ["--vocab", "--pairs", "--input", "--dev", "--output", "--feature-vocab"];
    for page in [
        "extract-features",
        "build-vocab",
        "train",
        "nearest",
        "classify-train",
        "classify-eval",
        "experiment",
    ] {
        let text = ok(&[page, "--help"]);
        let usage = text.lines().find(|l| l.starts_with("Usage:")).unwrap();
        let lines: Vec<&str> = text.lines().map(str::trim_start).collect();
        for (i, line) in lines
            .iter()
            .enumerate()
            .filter(|(_, l)| l.starts_with("--") && l.contains('<'))
        {
            let flag = line.split_whitespace().next().unwrap();
            if usage.contains(&format!("{flag} <")) || no_default.contains(&flag) {
                continue;
            }
            let help = format!("{line} {}", lines.get(i + 1).unwrap_or(&""));
            assert!(help.contains("[default"), "{page} {flag} has no documented default");
        }
    }
}

fn train_model(corpus: &Path, out: &Path, extra: &[&str]) -> String {
    let mut args = vec![
        "train",
        "--corpus",
        s(corpus),
        "--output",
        s(out),
        "--dim",
        "20",
        "--epochs",
        "2",
        "--seed",
        "42",
    ];
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn joint_with_zero_alpha_writes_the_text_model() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = core_fixture("corpus100k.conll");
    let text = dir.path().join("text.vec");
    let joint = dir.path().join("joint.vec");
    train_model(&corpus, &text, &["--mode", "text"]);
    let report = train_model(&corpus, &joint, &["--mode", "joint", "--alpha", "0"]);
    assert!(report.lines().all(|l| l.starts_with("epoch=")));
    assert_eq!(std::fs::read(&text).unwrap(), std::fs::read(&joint).unwrap());
    let other = dir.path().join("joint1.vec");
    train_model(&corpus, &other, &["--mode", "joint", "--alpha", "1"]);
    assert_ne!(std::fs::read(&text).unwrap(), std::fs::read(&other).unwrap());
}

#[test]
fn nearest_prints_k_tab_separated_lines() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.vec");
    std::fs::write(&model, "4 2\na 1 0\nb 0.9 0.1\nc 0 1\nd -1 0\n").unwrap();
    let out = ok(&["nearest", "--model", s(&model), "--word", "a", "--k", "2"]);
    assert_eq!(out, "b\t0.993884\nc\t0.000000\n");
    assert_eq!(
        run(&["nearest", "--model", s(&model), "--word", "zz"]).status.code(),
        Some(2)
    );
}

/// extract → vocabularies → train → classify → experiment on the 100KB
/// fixture corpus, compared against the pinned report.
#[test]
fn pipeline_reproduces_the_pinned_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = core_fixture("corpus100k.conll");
    let pairs = core_fixture("corpus100k_pairs.tsv");
    let feats = d.join("features.pairs");
    let words = d.join("words.vocab");
    let fvocab = d.join("features.vocab");

    ok(&["extract-features", "--input", s(&corpus), "--output", s(&feats)]);
    ok(&["build-vocab", "--input", s(&corpus), "--output", s(&words)]);
    ok(&["build-vocab", "--pairs", s(&feats), "--output", s(&fvocab)]);

    let mut spec = String::from(
        "architectures = mlp, shared-mlp, shared-cos\nsplit = 0.8, 0.1, 0.1\nhidden = 50\nepochs = 30\nseed = 7\n",
    );
    for mode in ["text", "features", "joint"] {
        let model = d.join(format!("{mode}.vec"));
        let report = ok(&[
            "train",
            "--corpus",
            s(&corpus),
            "--output",
            s(&model),
            "--mode",
            mode,
            "--pairs",
            s(&feats),
            "--vocab",
            s(&words),
            "--feature-vocab",
            s(&fvocab),
            "--dim",
            "30",
            "--epochs",
            "10",
            "--seed",
            "3",
        ]);
        assert!(report.contains("epoch=10"));
        spec.push_str(&format!("vectors.{mode} = {mode}.vec\n"));
    }
    spec.push_str(&format!("dataset.toy = {}\n", s(&pairs)));

    let ckpt = d.join("clf.txt");
    let joint = d.join("joint.vec");
    let trained = ok(&[
        "classify",
        "train",
        "--arch",
        "shared-mlp",
        "--model",
        s(&joint),
        "--pairs",
        s(&pairs),
        "--output",
        s(&ckpt),
        "--hidden",
        "20",
        "--epochs",
        "5",
    ]);
    assert!(trained.starts_with("train accuracy="));
    let eval = ok(&[
        "classify-eval",
        "--checkpoint",
        s(&ckpt),
        "--model",
        s(&joint),
        "--pairs",
        s(&pairs),
    ]);
    assert_eq!(
        eval.lines().next(),
        trained.lines().next().map(|l| l.trim_start_matches("train "))
    );

    std::fs::write(d.join("spec.txt"), spec).unwrap();
    let tsv = d.join("report.tsv");
    let table = ok(&[
        "experiment",
        "--spec",
        s(&d.join("spec.txt")),
        "--output",
        s(&tsv),
        "--threads",
        "2",
    ]);
    assert!(table.contains("Shared Cosine"));
    let got = std::fs::read_to_string(&tsv).unwrap();

    let pinned = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline_report.tsv");
    if std::env::var_os("STRUCTVEC_UPDATE_SNAPSHOTS").is_some() {
        std::fs::write(&pinned, &got).unwrap();
        return;
    }
    let want = ExperimentReport::from_tsv(&std::fs::read_to_string(&pinned).unwrap()).unwrap();
    let got = ExperimentReport::from_tsv(&got).unwrap();
    assert_eq!(got, want);
}
