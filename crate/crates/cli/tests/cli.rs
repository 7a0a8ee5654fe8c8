use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("discflow-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn discflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn verify_all_on_a_rotation_exits_zero() {
    let dir = scratch("rotation");
    let cfg = write_config(
        &dir,
        r#"{"hamiltonian":{"kind":"rotation_family","rho":0.5},"name":"half_turn"}"#,
    );
    let out = dir.join("out");
    let o = discflow(&[
        "verify",
        "all",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--grid",
        "16",
        "--seed",
        "4",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    for check in [
        "hutchings",
        "closure",
        "brouwer",
        "wind",
        "membership",
        "hutchings_inverse",
        "degree_length",
    ] {
        let verdicts = read_json(out.join(format!("verdict_{check}.json")));
        for v in verdicts.as_array().unwrap() {
            assert_eq!(v["status"], "WITNESS_FOUND", "{check}: {v}");
        }
    }
    let loops = read_json(out.join("verdict_degree_length.json"));
    assert_eq!(loops[0]["evidence"]["seed"], 4);
}

#[test]
fn inconclusive_verdicts_exit_two() {
    let dir = scratch("membership");
    let o = discflow(&["verify", "membership", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let verdicts = read_json(dir.join("verdict_membership.json"));
    let statuses: Vec<&str> = verdicts
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["status"].as_str().unwrap())
        .collect();
    assert!(statuses.contains(&"INCONCLUSIVE"));
    assert!(!statuses.contains(&"VIOLATION"));
}

#[test]
fn wind_on_fast_boundary_is_inconclusive() {
    let dir = scratch("wind");
    let cfg = write_config(
        &dir,
        r#"{"hamiltonian":{"kind":"rotation_family","rho":1.5}}"#,
    );
    let o = discflow(&[
        "verify",
        "wind",
        "--config",
        &cfg,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v = read_json(dir.join("verdict_wind.json"));
    assert!(v[0]["evidence"]["precondition"]
        .as_str()
        .unwrap()
        .contains("not below 1"));
}

#[test]
fn radial_spectrum_csv_and_plot_data() {
    let dir = scratch("radial");
    let o = discflow(&[
        "radial-spec",
        "--format",
        "csv",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.join("radial_spectrum.csv")).unwrap();
    let values: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    let expected = [0.046053948273188, 1.0, 3.187646601862981];
    assert_eq!(values.len(), 3);
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "{v} vs {e}");
    }
    let plot = std::fs::read_to_string(dir.join("tangent_intercept.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1002);
}

#[test]
fn spectrum_writes_tables() {
    let dir = scratch("spectrum");
    let o = discflow(&[
        "spectrum",
        "--period-max",
        "4",
        "--format",
        "csv",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    assert!(table.starts_with("x,y,period,residual,action,mean_action,location"));
    assert!(dir.join("mean_action_vs_radius.csv").exists());
}

#[test]
fn calabi_routes_are_reported() {
    let dir = scratch("calabi");
    let o = discflow(&["calabi", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(dir.join("calabi.json"));
    assert!((v["calabi_h"].as_f64().unwrap() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-8);
    assert!((v["ratio"].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn errors_exit_one() {
    let dir = scratch("errors");
    let cfg = write_config(
        &dir,
        r#"{"hamiltonian":{"kind":"perturbed_radial","base":{"coeffs":[0.0,4.0,-4.0]},"modes":[]},"bogus":1}"#,
    );
    let o = discflow(&["calabi", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write_config(
        &dir,
        r#"{"hamiltonian":{"kind":"perturbed_radial","base":{"coeffs":[0.0,4.0,-4.0]},"modes":[{"amplitude":0.01,"time_freq":1,"angular_freq":1,"phase":0.0,"radial_power":0}]}}"#,
    );
    let o = discflow(&[
        "radial-spec",
        "--config",
        &cfg,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not radial"));
}

#[test]
fn mollify_diag_reports_exact_support() {
    let dir = scratch("mollify");
    let o = discflow(&[
        "mollify-diag",
        "--n",
        "4,32",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_json(dir.join("mollify_diag.json"));
    for r in rows.as_array().unwrap() {
        assert_eq!(r["support_exact"], true);
        assert!(
            r["refined_min_slope"].as_f64().unwrap()
                >= r["refined_slope_floor"].as_f64().unwrap() - 1e-9
        );
    }
}

#[test]
fn orbit_of_a_circle_closes() {
    let dir = scratch("orbit");
    let o = discflow(&[
        "orbit",
        "--x",
        "0.5",
        "--y",
        "-0.5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(dir.join("orbit.json"));
    // s = 1/2 is a circle of fixed points for 4s(1 − s)
    assert!(v["closure_gap"].as_f64().unwrap() < 1e-9);
    assert!((v["loop_action"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
