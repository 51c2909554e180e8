use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const ONEMAX: &str = r#"
[ea_run]
population = 20
fitness = "onemax"
generations = 500
seed = 7

[ea_run.representation]
kind = "bitstring"
length = 8

[ea_run.selection]
kind = "truncation"
elitist = true

[[ea_run.variation]]
kind = "bit-flip"
p = 0.125
"#;

fn evoauto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoauto"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn accept_verdicts_and_exit_codes() {
    let o = evoauto(&["accept", "anbn", "aabb"]);
    assert_eq!(
        (stdout(&o).trim(), o.status.code()),
        ("ACCEPTED level=2", Some(0))
    );
    let o = evoauto(&["accept", "anbncn", "ab"]);
    assert_eq!((stdout(&o).trim(), o.status.code()), ("REJECTED", Some(1)));
    let o = evoauto(&["accept", "ep-mutated", "x", "--levels", "3"]);
    assert_eq!(
        (stdout(&o).trim(), o.status.code()),
        ("UNKNOWN levels=3", Some(2))
    );
}

#[test]
fn malformed_word_is_usage_error() {
    let o = evoauto(&["accept", "anbn", "abq"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed word"));
    assert_eq!(evoauto(&["accept", "nosuch", "a"]).status.code(), Some(64));
}

#[test]
fn config_defined_efas_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let level = dir.path().join("only_ab.nfa");
    fs::write(
        &level,
        "kind nfa\nalphabet a b\nstate p q r\nstart p\naccept r\ntrans p a q\ntrans q b r\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "[efa.ab]\nkind = \"explicit\"\nlevels = [\"only_ab.nfa\"]\n[efa.bin]\nkind = \"singleton\"\nenumerator = \"binary\"\n",
    );
    let o = evoauto(&["accept", "ab", "ab", "--config", &cfg]);
    assert_eq!(
        (stdout(&o).trim(), o.status.code()),
        ("ACCEPTED level=0", Some(0))
    );
    let o = evoauto(&["accept", "ab", "ba", "--config", &cfg]);
    assert_eq!(
        (stdout(&o).trim(), o.status.code()),
        ("UNKNOWN levels=1", Some(2))
    );
    let o = evoauto(&["accept", "bin", "1010", "--config", &cfg]);
    assert_eq!(stdout(&o).trim(), "ACCEPTED level=10");
}

#[test]
fn run_writes_monotone_reproducible_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ONEMAX);
    let out = dir.path().join("out");
    let o = evoauto(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("BEST_FITNESS=8"));
    assert!(text.contains("STOP_REASON=fitness-optimum"));
    assert!(text.contains("SEED=7"));

    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("# config_digest="));
    assert!(csv.contains("# seed=7\n"));
    let best: Vec<f64> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(best.windows(2).all(|w| w[0] <= w[1]));

    let again = dir.path().join("again");
    evoauto(&["run", "--config", &cfg, "--out", again.to_str().unwrap()]);
    assert_eq!(
        fs::read(out.join("trace.csv")).unwrap(),
        fs::read(again.join("trace.csv")).unwrap()
    );
}

#[test]
fn run_config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ONEMAX.replace("generations = 500", ""));
    assert_eq!(evoauto(&["run", "--config", &cfg]).status.code(), Some(64));
    let cfg = write_config(
        dir.path(),
        &ONEMAX.replace("seed = 7", "seed = 7\ncolour = 1"),
    );
    assert_eq!(evoauto(&["run", "--config", &cfg]).status.code(), Some(64));
    let cfg = write_config(dir.path(), &ONEMAX.replace("p = 0.125", "p = -0.1"));
    assert_eq!(evoauto(&["run", "--config", &cfg]).status.code(), Some(64));
    assert_eq!(evoauto(&["run"]).status.code(), Some(64));
}

#[test]
fn verify_nfl_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = evoauto(&["verify", "nfl", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS experiment=nfl"));
    let report = fs::read_to_string(dir.path().join("nfl_report.csv")).unwrap();
    assert!(report.contains("# config_digest="));
}

#[test]
fn verify_all_prints_four_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = evoauto(&["verify", "all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS ")).count(),
        4,
        "{text}"
    );
    for name in ["convergence", "nfl", "schema", "esrate"] {
        assert!(dir.path().join(format!("{name}_report.csv")).exists());
    }
}

#[test]
fn schema_longer_than_genome_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[schema]\nschema = \"1##########\"\n");
    let o = evoauto(&[
        "verify",
        "schema",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn failing_experiment_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[esrate]\ndimension = 2\nstart = [0.001, 0.0]\nsigma0 = 1000.0\nsigma_floor = 1000.0\nseeds = 1\niterations = 50\nburn_in = 0\n",
    );
    let o = evoauto(&[
        "verify",
        "esrate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL experiment=esrate"));
    let report = fs::read_to_string(dir.path().join("esrate_report.csv")).unwrap();
    assert!(report.contains("no adaptation"));
}
