use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn seqteach(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqteach"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

const TINY: &str = r#"
seed = 2
k = 8
n_best = 4

[synthetic]
n_words = 30

[optimizer]
steps = 2
horizon = 80
n_dirs = 2
n_seq = 2

[efficiency]
ks = [6, 10]
reps = 2
"#;

#[test]
fn encode_prints_slot_bits() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("v.tsv"),
        "word\tphonemes\ncoals\tk o l z\ncat\tk @ t\n",
    )
    .unwrap();
    let out = seqteach(dir.path(), &["encode", "--vocab", "v.tsv"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["orth"], "__coals___");
    assert_eq!(
        lines[0]["input_bits"],
        serde_json::json!([54, 92, 104, 141, 174])
    );
    assert_eq!(lines[1]["orth"], "__ca_t____");
    assert_eq!(lines[1]["input_bits"], serde_json::json!([54, 78, 149]));
}

#[test]
fn full_workflow_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    let run = |args: &[&str]| {
        let mut all = vec!["--config", "tiny.toml", "--out", "out"];
        all.extend_from_slice(args);
        let out = seqteach(dir.path(), &all);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["gen-vocab"]);
    run(&["split"]);
    run(&["efficiency"]);
    run(&["optimize", "--stage", "one"]);
    run(&["optimize", "--stage", "two"]);
    run(&["sample-seq", "--from", "out/stage2.ckpt"]);
    run(&["analyze", "--from", "out/stage2.ckpt"]);
    run(&["compare"]);
    let out = dir.path().join("out");
    for f in [
        "vocab.tsv",
        "exceptions.txt",
        "split.json",
        "efficiency.json",
        "efficiency.svg",
        "stage1_distribution.csv",
        "stage2_distribution.csv",
        "sequence.tsv",
        "analysis.csv",
        "comparison.json",
        "comparison.csv",
        "comparison.svg",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let seq = fs::read_to_string(out.join("sequence.tsv")).unwrap();
    assert_eq!(seq.lines().count(), 81);

    // Resuming a finished run changes nothing.
    let before = fs::read(out.join("comparison.json")).unwrap();
    run(&["compare", "--resume"]);
    assert_eq!(fs::read(out.join("comparison.json")).unwrap(), before);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(seqteach(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(
        seqteach(dir.path(), &["compare", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(
        seqteach(dir.path(), &["--k", "0", "split"]).status.code(),
        Some(1)
    );

    fs::write(dir.path().join("bad.toml"), "nonsense = 1\n").unwrap();
    assert_eq!(
        seqteach(dir.path(), &["--config", "bad.toml", "split"])
            .status
            .code(),
        Some(1)
    );

    fs::write(
        dir.path().join("broken.ckpt"),
        "seqteach-checkpoint optimizer v1 5 00\n{}",
    )
    .unwrap();
    let out = seqteach(dir.path(), &["analyze", "--from", "broken.ckpt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    fs::write(dir.path().join("v.tsv"), "spelling\tphonemes\ncat\tk @ t\n").unwrap();
    assert_eq!(
        seqteach(dir.path(), &["--vocab", "v.tsv", "split"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        seqteach(dir.path(), &["--vocab", "missing.tsv", "split"])
            .status
            .code(),
        Some(3)
    );
}
