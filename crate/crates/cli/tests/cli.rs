use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use simo_ee_cli::commands::SWEEP_HEADER;
use simo_ee_cli::scenario::Scenario;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simo-ee"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], scenario: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--scenario").arg(scenario);
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const FIG8: &str = r#"{"channel": {"signal_path_loss": 1e-5,
  "interferer_rx_powers_uW": [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625]},
  "antennas": 4, "constraints": {"epsilon": 1e-3, "r_min_bpshz": 0.01, "p_min_w": 0.01, "p_max_w": 10}}"#;

#[test]
fn allocate_reference_scenario() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let o = run(&["allocate"], &s);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["scheme"], "SC");
    assert_eq!(v["regime"], "interior");
    assert!((v["p0_star_w"].as_f64().unwrap() - 0.429).abs() < 1e-3);
    assert!((v["r0_star_bpshz"].as_f64().unwrap() - 1.125).abs() < 1e-3);
}

#[test]
fn allocate_scheme_override_and_out_file() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let out = dir.path().join("r.json");
    let o = bin()
        .args(["allocate", "--scheme", "mrc", "--scenario"])
        .arg(&s)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["scheme"], "MRC");
}

#[test]
fn infeasible_scenario_exits_2() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "s.json",
        r#"{"antennas": 1, "constraints": {"epsilon": 1e-9, "r_min_bpshz": 5, "p_min_w": 0.01, "p_max_w": 10}}"#,
    );
    let o = run(&["allocate"], &s);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["regime"], "infeasible");
}

#[test]
fn malformed_inputs_exit_1() {
    let dir = TempDir::new().unwrap();
    for body in [
        "{\"antennas\": }",
        "{\"antennas\": 4, \"colour\": 1}",
        r#"{"channel": {"kappa": 8, "delta_db": 10, "signal_path_loss": 1e-5}}"#,
        r#"{"channel": {"kappa": 8}}"#,
        r#"{"constraints": {"epsilon": 2, "r_min_bpshz": 0, "p_min_w": 0.01, "p_max_w": 10}}"#,
    ] {
        let s = write(&dir, "s.json", body);
        let o = run(&["allocate"], &s);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(!o.stderr.is_empty());
    }
    let o = run(&["allocate"], &dir.path().join("missing.json"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{\n  \"antennas\": 4,\n  \"schem\": \"sc\"\n}");
    let o = run(&["allocate"], &s);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("schem"), "{err}");
}

#[test]
fn epsilon_sweep_table() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let o = run(&["sweep", "--var", "epsilon", "--from", "1e-9", "--to", "1e-1", "--points", "9", "--log"], &s);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some(SWEEP_HEADER));
    let rows = csv(&text);
    assert_eq!(rows.len(), 27);
    let order: Vec<&str> = rows[..3].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(order, ["SC", "SSC", "MRC"]);
    for scheme in ["SC", "SSC", "MRC"] {
        let p: Vec<f64> = rows.iter().filter(|r| r[1] == scheme).map(|r| r[2].parse().unwrap()).collect();
        assert!(p.windows(2).all(|w| w[1] <= w[0]), "{scheme}: {p:?}");
    }
    let vars: Vec<f64> = rows.iter().step_by(3).map(|r| r[0].parse().unwrap()).collect();
    assert!(vars.windows(2).all(|w| w[0] < w[1]));
    assert!(!text.contains(';'));
}

#[test]
fn antenna_sweep_shows_ssc_overtaking_mrc() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "s.json",
        r#"{"constraints": {"epsilon": 1e-3, "r_min_bpshz": 0.01, "p_min_w": 0.01, "p_max_w": 10}}"#,
    );
    let o = run(&["sweep", "--var", "M", "--from", "1", "--to", "20", "--points", "20", "--scheme", "ssc,mrc"], &s);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv(&stdout(&o));
    assert_eq!(rows.len(), 40);
    let ee = |m: usize, scheme: &str| -> f64 {
        rows.iter().find(|r| r[0] == m.to_string() && r[1] == scheme).unwrap()[4].parse().unwrap()
    };
    let first = (2..=20).find(|&m| ee(m, "SSC") > ee(m, "MRC")).unwrap();
    assert!((13..=17).contains(&first), "first M with SSC ahead: {first}");
}

#[test]
fn two_point_sweep_and_bad_range() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let o = run(&["sweep", "--var", "eta", "--from", "0.2", "--to", "0.5", "--points", "2", "--scheme", "mrc"], &s);
    assert_eq!(csv(&stdout(&o)).len(), 2);
    for bad in [
        ["--from", "0.5", "--to", "0.2", "--points", "4"],
        ["--from", "0.2", "--to", "0.5", "--points", "1"],
        ["--from", "0.2", "--to", "1.5", "--points", "4"],
    ] {
        let mut args = vec!["sweep", "--var", "eta"];
        args.extend(bad);
        assert_eq!(run(&args, &s).status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn delta_and_receive_power_sweeps() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let o = run(&["sweep", "--var", "delta_db", "--from", "0", "--to", "20", "--points", "3", "--scheme", "sc"], &s);
    let p: Vec<f64> = csv(&stdout(&o)).iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
    let o = run(&["sweep", "--var", "p_r_w", "--from", "0.01", "--to", "0.2", "--points", "3", "--scheme", "sc"], &s);
    let p: Vec<f64> = csv(&stdout(&o)).iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
}

#[test]
fn dist_per_antenna_rows() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "s.json",
        r#"{"channel": {"signal_path_loss": 30e-6, "interferer_rx_powers_uW": [0.5, 0.25]}, "antennas": 1}"#,
    );
    let o = run(&["dist", "--scheme", "sc", "--from", "0", "--to", "1", "--points", "2", "--exact"], &s);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("gamma,exact,bound"));
    let rows = csv(&text);
    assert_eq!(rows[0], ["0", "0", "0"]);
    let exact: f64 = rows[1][1].parse().unwrap();
    let bound: f64 = rows[1][2].parse().unwrap();
    assert!((exact - 0.0245225).abs() < 1e-6);
    assert!((bound - 0.0245389).abs() < 1e-6);
}

#[test]
fn dist_exact_needs_topology() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    let o = run(&["dist", "--scheme", "sc", "--from", "0", "--to", "1", "--points", "3", "--exact"], &s);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["dist", "--scheme", "ssc", "--from", "0", "--to", "1", "--points", "3"], &s);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("gamma,bound"));
}

#[test]
fn dist_mrc_marks_non_convergence() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"channel": {"kappa": 20, "delta_db": 10}}"#);
    let o = bin()
        .args(["dist", "--scheme", "mrc", "--from", "0.01", "--to", "0.05", "--points", "3", "--log", "--exact"])
        .arg("--scenario")
        .arg(&s)
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("x,exact,approx,lower_bound"));
    let rows = csv(&text);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "NA" && r[2] != "NA" && r[3] != "NA"));
}

#[test]
fn validate_reference_topology_passes_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", FIG8);
    let args = ["validate", "--samples", "2000000", "--seed", "5"];
    let a = run(&args, &s);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let report = stdout(&a);
    assert!(report.contains("reliability,") && report.contains("grid_ee,"));
    assert!(report.lines().filter(|l| l.contains(",pass,")).count() == 2, "{report}");
    let b = run(&args, &s);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_with_few_samples_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", FIG8);
    let o = run(&["validate", "--samples", "1000", "--seed", "1", "--grid-points", "200"], &s);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("inconclusive"));
}

#[test]
fn validate_needs_topology() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", "{}");
    assert_eq!(run(&["validate", "--samples", "1000"], &s).status.code(), Some(1));
}

#[test]
fn default_scenario_round_trips_through_a_file() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", &Scenario::default().to_json());
    let from_file = stdout(&run(&["allocate"], &s));
    let e = write(&dir, "e.json", "{}");
    assert_eq!(from_file, stdout(&run(&["allocate"], &e)));
}
