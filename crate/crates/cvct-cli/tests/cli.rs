//! End-to-end tests of the `cvct` binary: scenario files, sweeps, output
//! determinism, exit codes.

use std::io::Write;
use std::process::{Command, Output};

fn cvct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvct"))
        .args(args)
        .env_remove("CVCT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(csv: &str) -> Vec<String> {
    csv.lines()
        .find(|l| !l.starts_with('#'))
        .expect("header present")
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn minimal_scenario_file_applies_defaults() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{{\"mode\": \"single-fidelity\"}}").unwrap();
    let out = cvct(&["--scenario", file.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for expected in [
        "# mode = single-fidelity",
        "# q0 = 0",
        "# p0 = 0",
        "# r1 = 0",
        "# r2 = 0",
        "# theta = 0",
    ] {
        assert!(text.contains(expected), "missing '{expected}' in:\n{text}");
    }
    // vacuum payload with X0 = 0: the coherent-state fidelity constant
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let cols = header(&text);
    let fidelity_at = cols.iter().position(|c| c == "fidelity").unwrap();
    let fidelity: f64 = rows[0][fidelity_at].parse().unwrap();
    assert!((fidelity - 0.9428090415820634).abs() < 1e-12);
}

#[test]
fn unknown_scenario_key_is_rejected_by_name() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{{\"mode\": \"single-fidelity\", \"bogus_key\": 1.0}}").unwrap();
    let out = cvct(&["--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus_key"), "stderr: {err}");
}

#[test]
fn malformed_json_reports_location() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{{\"mode\": ").unwrap();
    let out = cvct(&["--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line") && err.contains("column"), "stderr: {err}");
}

#[test]
fn invalid_flags_exit_two() {
    let out = cvct(&["--mode", "no-such-mode"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cvct(&["--mode", "single-prob", "--param", "width"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cvct(&["--mode", "single-prob", "--sweep", "width:0:1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cvct(&["--mode", "single-prob", "--param", "nope=1"]);
    assert_eq!(out.status.code(), Some(2));
    // degenerate window width is a configuration mistake
    let out = cvct(&["--mode", "single-prob", "--param", "width=0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fidelity_sweep_matches_known_curve() {
    // theta sweep at matched squeezing passes through 2*sqrt(2)/3 at theta=0
    let out = cvct(&[
        "--mode",
        "single-fidelity",
        "--param",
        "r1=0.5",
        "--param",
        "r2=0.5",
        "--param",
        "q0=0",
        "--sweep",
        "theta:0:3.141592653589793:7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 7);
    let cols = header(&text);
    let fidelity_at = cols.iter().position(|c| c == "fidelity").unwrap();
    let quad_at = cols.iter().position(|c| c == "fidelity_quad").unwrap();
    let first: f64 = rows[0][fidelity_at].parse().unwrap();
    assert!((first - 0.9428090415820634).abs() < 1e-10);
    for row in &rows {
        let closed: f64 = row[fidelity_at].parse().unwrap();
        let quadrature: f64 = row[quad_at].parse().unwrap();
        assert!((closed - quadrature).abs() < 1e-7);
        assert!((0.0..=1.0 + 1e-12).contains(&closed));
    }
}

#[test]
fn matched_squeezing_sweep_reproduces_fidelity_curve() {
    // r1 = r2 = r, theta = pi, X0 = 0: fidelity near one deep in the
    // momentum-squeezed region, decaying toward r > 0
    let out = cvct(&[
        "--mode",
        "single-fidelity",
        "--param",
        "q0=0",
        "--param",
        "theta=3.141592653589793",
        "--sweep",
        "r:-1:1:11",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let cols = header(&text);
    let fidelity_at = cols.iter().position(|c| c == "fidelity").unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 11);
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r[fidelity_at].parse().unwrap())
        .collect();
    assert!(values[0] > 0.99, "F(r=-1) = {}", values[0]);
    assert!(values[10] < 0.5, "F(r=1) = {}", values[10]);
    for pair in values.windows(2) {
        assert!(pair[1] < pair[0] + 1e-12);
    }
}

#[test]
fn chain_probability_family_increases_with_n() {
    let out = cvct(&[
        "--mode",
        "chain-prob",
        "--param",
        "r1=0.25",
        "--param",
        "r2=0.25",
        "--param",
        "width=2",
        "--sweep",
        "n:2:10:5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let cols = header(&text);
    let p_at = cols.iter().position(|c| c == "p_tel").unwrap();
    let mut last = 0.0;
    for row in data_rows(&text) {
        let p: f64 = row[p_at].parse().unwrap();
        assert!(p > last - 1e-12);
        last = p;
    }
}

#[test]
fn csv_is_byte_identical_across_thread_counts() {
    let args = [
        "--mode",
        "chain-fidelity",
        "--param",
        "r1=-0.4",
        "--param",
        "r2=-0.4",
        "--param",
        "q0=0",
        "--sweep",
        "n:1:40:14",
    ];
    let one = cvct(&[&args[..], &["--threads", "1"]].concat());
    let four = cvct(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);

    // and across repeated runs
    let again = cvct(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(four.stdout, again.stdout);
}

#[test]
fn env_var_supplies_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_cvct"))
        .args(["--mode", "single-prob", "--sweep", "width:0.5:2:4"])
        .env("CVCT_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_cvct"))
        .args(["--mode", "single-prob"])
        .env("CVCT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_config_round_trips() {
    let out = cvct(&[
        "--mode",
        "single-prob",
        "--param",
        "q0=1.25",
        "--param",
        "width=2",
        "--sweep",
        "r2:-1:1:3",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let document: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let config = document["config"].as_object().unwrap();

    // feed the emitted config back in as a scenario file
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let mut object = serde_json::Map::new();
    for (key, value) in config {
        let raw = value.as_str().unwrap();
        if key == "mode" || key == "sweep" {
            object.insert(key.clone(), serde_json::Value::from(raw));
        } else {
            object.insert(
                key.clone(),
                serde_json::Value::from(raw.parse::<f64>().unwrap()),
            );
        }
    }
    write!(file, "{}", serde_json::Value::Object(object)).unwrap();
    let replay = cvct(&[
        "--scenario",
        file.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(replay.status.success());
    let replay_document: serde_json::Value = serde_json::from_slice(&replay.stdout).unwrap();
    assert_eq!(document["config"], replay_document["config"]);
    assert_eq!(document["rows"], replay_document["rows"]);
}

#[test]
fn rows_echo_full_parameter_set() {
    let out = cvct(&[
        "--mode",
        "avg-fidelity",
        "--param",
        "q0=0.5",
        "--sweep",
        "width:0.5:1.5:3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let cols = header(&text);
    for key in ["q0", "p0", "r1", "r2", "theta", "width"] {
        assert!(cols.iter().any(|c| c == key), "column {key} missing");
    }
    let q0_at = cols.iter().position(|c| c == "q0").unwrap();
    let width_at = cols.iter().position(|c| c == "width").unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[q0_at], "0.5");
        let width: f64 = row[width_at].parse().unwrap();
        assert!((width - (0.5 + 0.5 * i as f64)).abs() < 1e-12);
    }
}

#[test]
fn optimize_center_recovers_minus_q0() {
    let out = cvct(&[
        "--mode",
        "optimize-center",
        "--param",
        "q0=1.3",
        "--param",
        "n=1",
        "--param",
        "width=0.8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let cols = header(&text);
    let at = cols.iter().position(|c| c == "center_opt").unwrap();
    let center: f64 = data_rows(&text)[0][at].parse().unwrap();
    assert!((center + 1.3).abs() < 1e-4, "center {center}");
}

#[test]
fn wigner_mode_emits_lattice_peaked_at_rotated_center() {
    let out = cvct(&[
        "--mode",
        "wigner",
        "--param",
        "q0=1",
        "--param",
        "p0=0.5",
        "--param",
        "qsteps=21",
        "--param",
        "psteps=21",
        "--grid-points",
        "2048",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let cols = header(&text);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 21 * 21);
    let q_at = cols.iter().position(|c| c == "q").unwrap();
    let p_at = cols.iter().position(|c| c == "p").unwrap();
    let w_at = cols.iter().position(|c| c == "w").unwrap();
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for row in &rows {
        let q: f64 = row[q_at].parse().unwrap();
        let p: f64 = row[p_at].parse().unwrap();
        let w: f64 = row[w_at].parse().unwrap();
        assert!(w.is_finite());
        if w > best.2 {
            best = (q, p, w);
        }
    }
    // mode 1 of the cluster holds the Fourier-conjugated payload: its
    // phase-space center sits at (p0, -q0)
    assert!((best.0 - 0.5).abs() <= 0.51, "q peak at {}", best.0);
    assert!((best.1 + 1.0).abs() <= 0.51, "p peak at {}", best.1);
    assert!(best.2 > 0.0);
}

#[test]
fn verify_mode_passes_and_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.csv");
    let out = cvct(&[
        "--mode",
        "verify",
        "--grid-points",
        "2048",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row.last().unwrap(), "true");
    }
}

#[test]
fn verify_mode_fails_with_impossible_tolerance() {
    let out = cvct(&["--mode", "verify", "--grid-points", "2048", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
}
