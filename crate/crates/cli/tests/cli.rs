use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vdwgate_cli::record::{ConvergenceRow, SweepRow};
use vdwgate_cli::{ResultRecord, RunConfig};

fn vdwgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdwgate")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn stdout(o: &Output) -> &str {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    std::str::from_utf8(&o.stdout).unwrap()
}

fn record(args: &[&str]) -> ResultRecord {
    serde_json::from_str(stdout(&vdwgate(args))).unwrap()
}

fn csv_rows<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap()
}

fn with_config(dir: &TempDir, json: &str, cmd: &[&str]) -> Output {
    let p = write_config(dir, "run.json", json);
    let mut args = cmd.to_vec();
    args.extend(["--config", p.to_str().unwrap()]);
    vdwgate(&args)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reports_parameter_chain() {
    let r = record(&["solve"]);
    assert!((r.params.separation_um.unwrap() - 20.99).abs() < 0.01);
    assert!((r.params.t_gate_us - 3.42).abs() < 0.02);
    assert!((r.params.theta_rad - PI).abs() < 1e-12);
    assert!(r.gate.is_none() && r.grid.is_none());

    let dir = TempDir::new().unwrap();
    let fast = with_config(&dir, r#"{"omega_c_mhz": 4.6, "omega_t_mhz": 4.6}"#, &["solve"]);
    let r: ResultRecord = serde_json::from_str(stdout(&fast)).unwrap();
    assert!((r.params.t_gate_us - 0.594).abs() < 0.005);
}

#[test]
fn malformed_configs_exit_with_code_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"noise": {"sigma_z0_um": "wide"}}"#, "noise.sigma_z0_um"),
        (r#"{"omega_c": 0.8}"#, "omega_c"),
        (r#"{"omega_t_mhz": -1.0}"#, "omega_t_mhz"),
        (r#"{"theta_rad": 0.0}"#, "theta_rad"),
        (r#"{"sampling": {"deltas": [0.25, 0.4]}}"#, "sampling.deltas[1]"),
        (r#"{"sampling": {"mode": "mc", "mc_samples": 10}}"#, "sampling.mc_samples"),
        (r#"{"gate": "cnot", "theta_rad": 1.0}"#, "theta"),
        (r#"{"noise": "#, "EOF"),
    ];
    for (json, field) in cases {
        let o = with_config(&dir, json, &["simulate"]);
        assert_eq!(o.status.code(), Some(2), "{json}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{json}: {err}");
    }
    let o = vdwgate(&["solve", "--config", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(vdwgate(&["solve", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(vdwgate(&["sweep", "--axis", "omega", "--values", "0.8"]).status.code(), Some(2));
}

#[test]
fn simulate_nominal_cz() {
    let r = record(&["simulate"]);
    let g = r.gate.unwrap();
    assert!(g.fidelity > 1.0 - 1e-9);
    assert!(g.max_deviation < 1e-9);
    assert!((g.matrix[3][3][0] + 1.0).abs() < 1e-9);
    assert!((r.t_ryd_us.unwrap() - 1.91).abs() < 0.02);
    let d = r.decay.unwrap();
    assert!((d.e_decay_room / 6.14e-3 - 1.0).abs() < 0.02);
    assert!((d.e_decay_cryo / 1.74e-3 - 1.0).abs() < 0.02);
}

#[test]
fn simulate_cnot_and_zero_interaction() {
    let dir = TempDir::new().unwrap();
    let o = with_config(&dir, r#"{"gate": "cnot"}"#, &["simulate"]);
    let r: ResultRecord = serde_json::from_str(stdout(&o)).unwrap();
    assert!(r.gate.unwrap().max_deviation < 1e-9);

    let o = with_config(&dir, r#"{"interaction_mhz": 0.0}"#, &["simulate"]);
    let r: ResultRecord = serde_json::from_str(stdout(&o)).unwrap();
    let g = r.gate.unwrap();
    assert!(g.max_deviation < 1e-9);
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((g.matrix[i][j][0] - expected).abs() < 1e-9 && g.matrix[i][j][1].abs() < 1e-9);
        }
    }
    assert!(r.params.separation_um.is_none());
    // no trap separation to average around
    assert_eq!(with_config(&dir, r#"{"interaction_mhz": 0.0}"#, &["fidelity"]).status.code(), Some(2));
}

#[test]
fn fidelity_convergence_csv() {
    let o = vdwgate(&["fidelity", "--format", "csv"]);
    let rows: Vec<ConvergenceRow> = csv_rows(stdout(&o));
    let reported = [0.9910, 0.9912, 0.9914, 0.9920, 0.9920];
    assert_eq!(rows.len(), 6);
    for (row, (delta, f)) in rows.iter().zip([0.25, 0.2, 0.15, 0.12, 0.1].into_iter().zip(reported)) {
        assert_eq!(row.estimator, "grid");
        assert_eq!(row.delta, delta);
        assert!((row.mean_fidelity - f).abs() < 1e-3);
    }
    let est = &rows[5];
    assert_eq!(est.estimator, "grid-extrapolated");
    assert!((est.mean_fidelity - 0.992).abs() < 1e-3);
    assert!((est.net_fidelity_300k - 0.986).abs() < 1e-3);
    assert!((est.net_fidelity_4k - 0.990).abs() < 1e-3);
}

#[test]
fn vanishing_spread_gives_unit_fidelity() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"noise": {"sigma_z0_um": 1e-6, "sigma_perp0_um": 1e-6, "temperature_uk": 0.0},
                   "sampling": {"mode": "both", "deltas": [0.5], "mc_samples": 5000}}"#;
    let r: ResultRecord = serde_json::from_str(stdout(&with_config(&dir, json, &["fidelity"]))).unwrap();
    assert!((r.grid.unwrap().mean_fidelity - 1.0).abs() < 1e-6);
    assert!((r.monte_carlo.unwrap().mean_fidelity - 1.0).abs() < 1e-6);
}

#[test]
fn monte_carlo_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"sampling": {"mode": "mc", "mc_samples": 50000, "mc_truncation": null}}"#;
    let cfg = write_config(&dir, "mc.json", json);
    let run = |extra: &[&str]| {
        let mut args = vec!["fidelity", "--config", path_str(&cfg)];
        args.extend_from_slice(extra);
        record(&args).monte_carlo.unwrap()
    };
    let a = run(&["--threads", "1"]);
    let b = run(&["--threads", "4"]);
    assert_eq!(a.mean_fidelity, b.mean_fidelity);
    assert_eq!(a.std_error, b.std_error);
    let c = run(&["--seed", "7"]);
    assert_ne!(a.mean_fidelity, c.mean_fidelity);
    assert!((a.mean_fidelity - c.mean_fidelity).abs() < 5.0 * a.std_error.unwrap());
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"seed": 99, "sampling": {"mode": "both", "deltas": [0.25, 0.125], "mc_samples": 20000}}"#;
    let first: ResultRecord = serde_json::from_str(stdout(&with_config(&dir, json, &["fidelity"]))).unwrap();
    let echo = write_config(&dir, "echo.json", &serde_json::to_string(&first.config).unwrap());
    let second = record(&["fidelity", "--config", path_str(&echo)]);
    assert_eq!(first.config, second.config);
    assert_eq!(first.params, second.params);
    assert_eq!(first.gate, second.gate);
    assert_eq!(first.t_ryd_us, second.t_ryd_us);
    assert_eq!(first.sigmas, second.sigmas);
    let (g1, g2) = (first.grid.unwrap(), second.grid.unwrap());
    assert_eq!(g1.mean_fidelity, g2.mean_fidelity);
    for (a, b) in g1.convergence.iter().zip(&g2.convergence) {
        assert_eq!(a.mean_fidelity, b.mean_fidelity);
    }
    let (m1, m2) = (first.monte_carlo.unwrap(), second.monte_carlo.unwrap());
    assert_eq!((m1.mean_fidelity, m1.std_error), (m2.mean_fidelity, m2.std_error));
    assert_ne!(first.run_id, second.run_id);
}

#[test]
fn records_round_trip_through_json() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"sampling": {"mode": "both", "deltas": [0.3], "mc_samples": 3000}}"#;
    let text = stdout(&with_config(&dir, json, &["fidelity"])).to_string();
    let r: ResultRecord = serde_json::from_str(&text).unwrap();
    let again: ResultRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(r, again);
    assert_eq!(RunConfig::from_json(&serde_json::to_string(&r.config).unwrap()).unwrap(), r.config);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("solve.json");
    let o = vdwgate(&["solve", "--out", path_str(&out)]);
    assert!(o.status.success() && o.stdout.is_empty());
    let r: ResultRecord = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.command, "solve");
}

#[test]
fn separation_sweep_peaks_at_the_solved_separation() {
    let o = vdwgate(&["sweep", "--axis", "separation", "--from", "20.5", "--to", "21.5", "--points", "11"]);
    let rows: Vec<SweepRow> = csv_rows(stdout(&o));
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[0].value < w[1].value));
    let best = rows.iter().max_by(|a, b| a.nominal_fidelity.total_cmp(&b.nominal_fidelity)).unwrap();
    assert!((best.value - 20.99).abs() <= 0.05, "peak at {}", best.value);
    assert!(rows.iter().all(|r| r.separation_um == r.value && r.axis == "separation"));
}

#[test]
fn temperature_sweep_is_sorted_and_non_increasing() {
    let o = vdwgate(&["sweep", "--axis", "temperature", "--values", "15,5,10"]);
    let rows: Vec<SweepRow> = csv_rows(stdout(&o));
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert_eq!(values, [5.0, 10.0, 15.0]);
    assert!(rows.windows(2).all(|w| w[1].mean_fidelity <= w[0].mean_fidelity));
}

#[test]
fn omega_sweep_rescales_the_gate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "grid.json", r#"{"sampling": {"deltas": [0.25]}}"#);
    let o = vdwgate(&["sweep", "--axis", "omega", "--values", "0.8,1.6", "--config", path_str(&cfg)]);
    let rows: Vec<SweepRow> = csv_rows(stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!((rows[0].t_gate_us / rows[1].t_gate_us - 2.0).abs() < 1e-12);
    assert!((rows[0].t_ryd_us / rows[1].t_ryd_us - 2.0).abs() < 1e-6);
    assert!(rows[1].separation_um < rows[0].separation_um);

    let o = vdwgate(&["sweep", "--axis", "omega", "--values", "0.8,1.6", "--format", "json", "--config", path_str(&cfg)]);
    let records: Vec<ResultRecord> = serde_json::from_str(stdout(&o)).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[1].config.omega_c_mhz, 1.6);
}
