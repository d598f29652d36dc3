use std::path::Path;
use std::process::{Command, Output};

fn cvf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SPEC: &str = "duration_s = 5\nCR.count = 6\nMCI.count = 6\nMCI.phase = random\nMCI.pause_shape = 0.7\n";

fn corpus(dir: &Path) {
    std::fs::write(dir.join("small.spec"), SPEC).unwrap();
    let o = cvf(dir, &["synth", "--spec", "small.spec", "--seed", "4", "--out", "corpus"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.join("corpus/manifest.csv").exists());
}

#[test]
fn full_workflow_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    for out in ["a.csv", "b.csv"] {
        let o = cvf(d, &["extract", "--manifest", "corpus/manifest.csv", "--out", out, "--rate-check"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let sequential = cvf(d, &["--sequential", "extract", "--manifest", "corpus/manifest.csv", "--out", "c.csv"]);
    assert_eq!(code(&sequential), 0);
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert_eq!(a, std::fs::read(d.join("c.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 82);

    let o = cvf(d, &["select", "--features", "a.csv", "--alpha", "0.05", "--out", "s.tsv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = std::fs::read_to_string(d.join("s.tsv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "feature\tF\tp\tretained");
    assert_eq!(table.lines().count(), 81);

    for report in ["r1.csv", "r2.csv"] {
        let o = cvf(
            d,
            &["evaluate", "--features", "a.csv", "--select", "--feature-set", "LF+CFD", "--k", "3", "--seed", "2", "--report", report],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let r1 = std::fs::read_to_string(d.join("r1.csv")).unwrap();
    assert_eq!(r1, std::fs::read_to_string(d.join("r2.csv")).unwrap());
    assert!(r1.lines().nth(1).unwrap().starts_with("full,LF+CFD,75,"));

    let o = cvf(d, &["evaluate", "--features", "a.csv", "--feature-set", "LF", "--k", "3", "--report", "r.txt"]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(d.join("r.txt")).unwrap().contains("CER global"));
}

#[test]
fn segments_prints_the_map() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let o = cvf(dir.path(), &["segments", "--wav", "corpus/CR_000.wav"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert!(rows.iter().any(|r| r[2] == "voiced"));
    assert_eq!(rows[0][0], "0.000000");
    assert_eq!(rows.last().unwrap()[1], "5.000000");
    for w in rows.windows(2) {
        assert_eq!(w[0][1], w[1][0]);
        assert_ne!(w[0][2], w[1][2]);
    }
}

#[test]
fn config_overrides_and_prints() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = cvf(d, &["--print-config"]);
    assert_eq!(code(&o), 0);
    let defaults = String::from_utf8(o.stdout).unwrap();
    for key in ["vad.frame_ms = 25", "svm.c = 1", "select.alpha = 0.05", "eval.k = 10", "nld.pe_order_long = 5"] {
        assert!(defaults.lines().any(|l| l == key), "{key}");
    }
    std::fs::write(d.join("defaults.cfg"), &defaults).unwrap();
    let o = cvf(d, &["--config", "defaults.cfg", "--print-config"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), defaults);

    std::fs::write(d.join("rbf.cfg"), "# tuned\nsvm.kernel = rbf\nsvm.gamma = 0.5\neval.k = 4\n").unwrap();
    let o = cvf(d, &["--config", "rbf.cfg", "--print-config"]);
    let printed = String::from_utf8(o.stdout).unwrap();
    assert!(printed.contains("svm.kernel = rbf\nsvm.gamma = 0.5\n"));
    assert!(printed.contains("eval.k = 4\n"));
}

#[test]
fn exit_codes_separate_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = cvf(d, &["select", "--features", "nope.csv", "--out", "s.tsv"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("nope.csv"));
    assert_eq!(code(&cvf(d, &["segments", "--wav", "nope.wav"])), 2);
    assert_eq!(code(&cvf(d, &["--config", "nope.cfg", "--print-config"])), 2);

    std::fs::write(d.join("bad.cfg"), "svm.c = -1\n").unwrap();
    assert_eq!(code(&cvf(d, &["--config", "bad.cfg", "--print-config"])), 1);
    std::fs::write(d.join("typo.cfg"), "svm.cost = 2\n").unwrap();
    let o = cvf(d, &["--config", "typo.cfg", "--print-config"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("typo.cfg:1"));

    std::fs::write(d.join("m.csv"), "path,label,subject_id\nx.wav,AD,s1\n").unwrap();
    let o = cvf(d, &["extract", "--manifest", "m.csv", "--out", "f.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("m.csv:2"), "{}", stderr(&o));

    std::fs::write(d.join("m2.csv"), "path,label,subject_id\ngone.wav,CR,s1\nalso.wav,MCI,s2\n").unwrap();
    assert_eq!(code(&cvf(d, &["extract", "--manifest", "m2.csv", "--out", "f.csv"])), 2);

    assert_eq!(code(&cvf(d, &[])), 1);
    assert_eq!(code(&cvf(d, &["evaluate", "--features", "f.csv", "--feature-set", "PE", "--report", "r.txt"])), 1);
    assert_eq!(code(&cvf(d, &["select", "--features", "f.csv", "--alpha", "1.5", "--out", "s.tsv"])), 1);
    assert_eq!(code(&cvf(d, &["--help"])), 0);
}

#[test]
fn rate_check_rejects_other_rates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("r.spec"), format!("sample_rate = 22050\n{SPEC}")).unwrap();
    assert_eq!(code(&cvf(d, &["synth", "--spec", "r.spec", "--out", "c"])), 0);
    assert_eq!(code(&cvf(d, &["extract", "--manifest", "c/manifest.csv", "--out", "f.csv"])), 0);
    let o = cvf(d, &["extract", "--manifest", "c/manifest.csv", "--out", "g.csv", "--rate-check"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("22050"));
    assert!(!d.join("g.csv").exists());
}
