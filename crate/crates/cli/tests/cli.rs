use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn modsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modsum")).args(args).output().expect("failed to launch modsum")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn simulate_into(dir: &Path, seed: &str) -> Output {
    modsum(&[
        "simulate",
        "--scenario",
        "classical-only-ii",
        "-N",
        "4",
        "-n",
        "16",
        "--trials",
        "50",
        "--seed",
        seed,
        "--transcript",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn simulate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_into(dir.path(), "5");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("p_err=0"));
    for name in ["config.toml", "rates.csv", "ledger.csv", "leakage.csv", "transcript.jsonl"] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert!(rates.starts_with("scenario,strategy,N,n,m,trials,receiver,rate,p_err,aborts,per_bit_success\n"));
    assert_eq!(rates.lines().count(), 1 + 4);
}

#[test]
fn saved_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(simulate_into(a.path(), "11").status.success());
    let config = a.path().join("config.toml");
    let out = modsum(&["simulate", "--config", config.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["rates.csv", "ledger.csv", "leakage.csv", "transcript.jsonl"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seeds_change_transcripts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(simulate_into(a.path(), "1").status.success());
    assert!(simulate_into(b.path(), "2").status.success());
    let read = |d: &Path| fs::read(d.join("transcript.jsonl")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}

#[test]
fn bad_receiver_count_is_a_config_error() {
    let out = modsum(&["simulate", "-N", "2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[config]"), "{err}");
}

#[test]
fn unknown_source_is_a_config_error() {
    let out = modsum(&["validate-ghz", "--source", "bogus", "--trials", "10"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));
}

#[test]
fn scaling_writes_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = modsum(&[
        "scaling",
        "--scenario",
        "entanglement+classical",
        "-N",
        "4,8,16,32",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fits = fs::read_to_string(dir.path().join("fits.csv")).unwrap();
    assert!(
        fits.lines().any(|l| l.starts_with("entanglement+classical,ghz_copies,") && l.ends_with(",quadratic")),
        "{fits}"
    );
    assert!(dir.path().join("scaling.csv").is_file());
}

#[test]
fn exact_leakage_of_a_mask() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("leakage.csv");
    let out = modsum(&[
        "leakage",
        "--protocol",
        "strategy-ii",
        "-N",
        "4",
        "--coalition",
        "2,3",
        "--secret",
        "r0",
        "--method",
        "exact",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.contains("strategy-ii,4,2|3,r0,exact,0.0,0.0,0.0"), "{text}");
}

#[test]
fn leakage_needs_both_coalition_and_secret() {
    let out = modsum(&["leakage", "--coalition", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));
}

#[test]
fn validation_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let out = modsum(&[
        "validate-ghz",
        "--source",
        "fixed-string",
        "-m",
        "2",
        "--trials",
        "500",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(summary).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "fixed-string");
    assert!(row[6].parse::<f64>().unwrap() >= 0.99);
}

#[test]
fn converse_reports_zero_information() {
    let out = modsum(&["converse", "-N", "5", "--samples", "20000"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("I(u;y)=0e0"));
}
