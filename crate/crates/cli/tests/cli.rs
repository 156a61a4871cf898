use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use lmes_core::purify::ThresholdReport;
use lmes_core::scenarios::SCENARIOS;

fn lmes(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmes"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn bell_threshold_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmes(&["threshold", "--scenario", "bell", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    let report = ThresholdReport::from_toml(&read(dir.path().join("out/bell.global_white.threshold.toml"))).unwrap();
    assert!((report.critical_parameter - 0.5).abs() < 0.01);
    let table = read(dir.path().join("out/thresholds.tsv"));
    assert!(table.starts_with("# state\tchannel\tthreshold\n"));
    assert!(table.contains("bell\tglobal_white\t0.50"));
}

#[test]
fn cj_check_prints_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmes(&["cj-check", "--scenario", "u123"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("depolarization 1.750000"), "{}", stdout(&o));
    assert!(dir.path().join("results/u123.cj.toml").exists());
}

#[test]
fn verify_oracle_three_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmes(&["verify-oracle", "--scenario", "u123", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("192 basis pairs"), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    assert!(read(dir.path().join("results/oracle.toml")).contains("passed = true"));
}

#[test]
fn config_file_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.toml"),
        "n = 3\ngates = [[1, 2, 3]]\ncolors = [[1], [2], [3]]\n",
    )
    .unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    std::fs::write(
        dir.path().join("cfg/batch.toml"),
        "command = \"threshold\"\nspec_file = \"../spec.toml\"\nname = \"mine\"\n\
         scenarios = [\"bell\", \"graph3\"]\nchannels = [\"global_white\", \"local_dephasing\"]\ntol = 1e-3\n",
    )
    .unwrap();
    let first = lmes(&["--config", "cfg/batch.toml", "--out", "a"], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = lmes(&["--config", "cfg/batch.toml", "--out", "b"], dir.path());
    let table = read(dir.path().join("a/thresholds.tsv"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 6);
    assert_eq!(table, read(dir.path().join("b/thresholds.tsv")));
    for f in ["bell.global_white.threshold.toml", "mine.local_dephasing.threshold.toml"] {
        assert_eq!(read(dir.path().join("a").join(f)), read(dir.path().join("b").join(f)));
    }
    assert_eq!(stdout(&first).replace("a/", "b/"), stdout(&second));
}

#[test]
fn phi_batch_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("phi.toml"), "command = \"phi-batch\"\nsamples = 50\n").unwrap();
    let run = |seed: &str, out: &str| {
        let o = lmes(&["--config", "phi.toml", "--seed", seed, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        read(dir.path().join(out).join("u123.phi_batch.tsv"))
    };
    let a = run("5", "a");
    assert_eq!(a, run("5", "b"));
    assert_ne!(a, run("6", "c"));
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 50);
    for line in a.lines().skip(1) {
        let v: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
        assert!(v > 1.0);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // parse errors, with the offending line or field named
    std::fs::write(p.join("bad.toml"), "command = \"threshold\"\nseed = -4\n").unwrap();
    let o = lmes(&["--config", "bad.toml"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert_eq!(lmes(&["threshold", "--scenario", "nope"], p).status.code(), Some(2));
    assert_eq!(lmes(&["threshold", "--tol", "0"], p).status.code(), Some(2));
    assert_eq!(lmes(&["bogus"], p).status.code(), Some(2));
    assert_eq!(lmes(&["--config", "missing.toml"], p).status.code(), Some(2));
    // bracket entirely above the threshold
    std::fs::write(p.join("br.toml"), "command = \"threshold\"\nscenario = \"bell\"\nbracket = [0.8, 0.9]\n").unwrap();
    let o = lmes(&["--config", "br.toml"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("partial table"), "{}", stderr(&o));
    assert_eq!(read(p.join("results/thresholds.tsv")), "# state\tchannel\tthreshold\n# missing: bell global_white\n");
    // a run below threshold does not converge
    std::fs::write(
        p.join("pur.toml"),
        "command = \"purify\"\nscenario = \"bell\"\nchannel = { kind = \"global_white\", parameter = 0.4 }\n",
    )
    .unwrap();
    let o = lmes(&["--config", "pur.toml"], p);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("failed"));
    assert!(p.join("results/bell.global_white.trace.tsv").exists());
}

#[test]
fn purify_and_build() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("pur.toml"),
        "command = \"purify\"\nscenario = \"u123\"\nschedule = \"ABC-CAB-BCA\"\n\
         channel = { kind = \"global_white\", parameter = 0.8 }\n",
    )
    .unwrap();
    let o = lmes(&["--config", "pur.toml"], p);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged"));
    let trace = read(p.join("results/u123.global_white.trace.tsv"));
    assert!(trace.lines().count() > 3);

    let o = lmes(&["build", "--scenario", "u123"], p);
    assert_eq!(o.status.code(), Some(0));
    let tsv = read(p.join("results/u123.state.tsv"));
    assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 8);
    assert!(tsv.lines().last().unwrap().contains("-0.353553390593"));
}

#[test]
fn every_scenario_runs_at_reduced_precision() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut args = vec!["threshold", "--tol", "0.01", "--max-rounds", "120"];
    for s in SCENARIOS {
        args.extend(["--scenario", s.name]);
    }
    let o = lmes(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = read(dir.path().join("results/thresholds.tsv"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), SCENARIOS.len());
    assert!(start.elapsed().as_secs() < 600);
}

#[test]
fn counterexample_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("ce.toml"), "command = \"counterexample\"\nschedule = \"ABC-CAB-BCA\"\ntol = 1e-4\n").unwrap();
    let o = lmes(&["--config", "ce.toml"], p);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(read(p.join("results/counterexample.toml")).contains("psd_range"));
    let o = lmes(&["compare", "--tol", "2e-3"], p);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("compare linear6: direct 0.34"), "{}", stdout(&o));
    // the cuts are only defined for the six-qubit linear state
    assert_eq!(lmes(&["compare", "--scenario", "u123"], p).status.code(), Some(2));
}
