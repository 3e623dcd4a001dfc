use std::f64::consts::SQRT_2;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn unclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unclab"))
        .args(args)
        .env_remove("UNCLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = unclab(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json_records(text: &str) -> Vec<Value> {
    let doc: Value = serde_json::from_str(text).unwrap();
    doc["records"].as_array().unwrap().clone()
}

fn field(v: &Value, name: &str) -> f64 {
    v[name].as_f64().unwrap_or_else(|| panic!("{name} in {v}"))
}

#[test]
fn analytic_sweep_covers_default_grid() {
    let out = ok(&["sweep", "--analytic"]);
    assert!(out.starts_with(
        "phi_deg,eps_analytic,eta_analytic,eps_est,eps_unc,eta_est,eta_unc,sigma_a,sigma_b,heis_prod,ozawa_sum,bound,heis_class,ozawa_class\n"
    ));
    let r = rows(&out);
    assert_eq!(r.len(), 19);
    assert_eq!(&r[0][..3], ["0", "0", "1.41421"]);
    assert_eq!(r[18][0], "90");
    assert_eq!(r[18][1], "1.41421");
    for row in &r {
        assert_eq!(row[11], "1");
        assert_eq!(row[12], "violated");
        assert_eq!(row[13], "satisfied");
    }
}

#[test]
fn single_detuning_row() {
    let r = rows(&ok(&["sweep", "--analytic", "--phi", "40:40:1"]));
    assert_eq!(r.len(), 1);
    let row = &r[0];
    assert_eq!(row[0], "40");
    assert_eq!(row[1], "0.68404");
    assert_eq!(row[2], "1.08335");
    assert_eq!(row[9], "0.741055");
    assert_eq!(row[10], "2.50845");
}

#[test]
fn simulated_sweep_is_reproducible() {
    let args = ["sweep", "--seed", "11", "--bootstrap", "50"];
    let a = unclab(&args);
    let b = unclab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = ok(&["sweep", "--seed", "12", "--bootstrap", "50"]);
    assert_ne!(stdout(&a), other);
}

#[test]
fn seed_from_environment_yields_to_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_unclab"));
        cmd.args(["simulate", "--phi", "40:40:1"]).env_remove("UNCLAB_SEED");
        if let Some(s) = env {
            cmd.env("UNCLAB_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_eq!(run(Some("5"), Some("6")), run(None, Some("6")));
    assert_ne!(run(Some("5"), None), run(None, None));
}

#[test]
fn simulate_counts_sum_per_state() {
    let out = ok(&[
        "simulate",
        "--phi",
        "0:90:3",
        "--contrast",
        "0.96",
        "--counts",
        "5400",
        "--seed",
        "3",
    ]);
    let r = rows(&out);
    assert_eq!(r.len(), 48);
    for block in r.chunks(4) {
        let total: u64 = block.iter().map(|row| row[4].parse::<u64>().unwrap()).sum();
        assert_eq!(total, 5400);
        assert!(block.iter().all(|row| row[1] == block[0][1]));
        let truth: f64 = block.iter().map(|row| row[6].parse::<f64>().unwrap()).sum();
        assert!((truth - 1.0).abs() < 1e-5);
    }
    let states: Vec<&str> = r[..16].iter().step_by(4).map(|row| row[1].as_str()).collect();
    assert_eq!(states, ["+z", "-z", "+x", "+y"]);
}

#[test]
fn simulate_reports_true_probabilities() {
    let r = rows(&ok(&["simulate", "--phi", "40:40:1"]));
    // +z: ½·½(1 ± sin 40°)
    assert_eq!(&r[0][..4], ["40", "+z", "+", "+"]);
    assert_eq!(r[0][6], "0.410697");
    assert_eq!(r[1][6], "0.0893031");
}

#[test]
fn estimate_recovers_simulated_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.csv");
    let p = path.to_str().unwrap();
    ok(&[
        "simulate", "--phi", "0:90:7", "--counts", "1000000", "--seed", "9", "--output", p,
    ]);
    let out = ok(&["estimate", p, "--bootstrap", "20", "--format", "json"]);
    let records = json_records(&out);
    assert_eq!(records.len(), 7);
    for r in &records {
        let deg = field(r, "phi_deg");
        let phi = deg.to_radians();
        // a zero true value sits under a clamped square root: error ~ (2/N)^¼
        let tol = |truth: f64| if truth.abs() < 1e-9 { 0.1 } else { 0.01 };
        let (eps, eta) = (2.0 * (phi / 2.0).sin(), SQRT_2 * phi.cos());
        assert!((field(r, "eps_est") - eps).abs() < tol(eps), "{r}");
        assert!((field(r, "eta_est") - eta).abs() < tol(eta), "{r}");
    }
}

fn write_exact_file(path: &Path, states: &[&str]) {
    let mut text = String::from("phi_deg,prepared_state,m1,m2,count,normalized_intensity,true_probability\n");
    for deg in [10.0f64, 40.0, 75.0] {
        let phi = deg.to_radians();
        for &state in states {
            let r: [f64; 3] = match state {
                "+z" => [0.0, 0.0, 1.0],
                "-z" => [0.0, 0.0, -1.0],
                "+x" => [1.0, 0.0, 0.0],
                _ => [0.0, 1.0, 0.0],
            };
            let dot = phi.cos() * r[0] + phi.sin() * r[1];
            for (m1, s1) in [("+", 1.0), ("-", -1.0)] {
                for (m2, s2) in [("+", 1.0), ("-", -1.0)] {
                    let p = 0.25 * (1.0 + s1 * dot) * (1.0 + s1 * s2 * phi.sin());
                    text.push_str(&format!("{deg},{state},{m1},{m2},{p:?},{p:?},{p:?}\n"));
                }
            }
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn estimate_on_exact_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exact.csv");
    write_exact_file(&path, &["+z", "-z", "+x", "+y"]);
    let o = unclab(&["estimate", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("not whole numbers"));
    let records = json_records(&stdout(&o));
    assert_eq!(records.len(), 3);
    for r in &records {
        assert!((field(r, "eps_est") - field(r, "eps_analytic")).abs() < 1e-9, "{r}");
        assert!((field(r, "eta_est") - field(r, "eta_analytic")).abs() < 1e-9, "{r}");
        assert_eq!(field(r, "eps_unc"), 0.0);
    }
}

#[test]
fn estimate_names_a_missing_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.csv");
    write_exact_file(&path, &["+z", "-z", "+x"]);
    let o = unclab(&["estimate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("+y"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn estimate_rejects_malformed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "phi_deg,prepared_state,m1,m2,count,normalized_intensity,true_probability\n40,+z,+,+,-3,0,0\n",
    )
    .unwrap();
    let o = unclab(&["estimate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn audit_passes_and_writes_json() {
    let o = unclab(&["audit", "--draws", "500", "--seed", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let records = json_records(&stdout(&o));
    let kinds: Vec<&str> = records.iter().map(|r| r["audit"].as_str().unwrap()).collect();
    assert_eq!(kinds.len(), 3);
    assert_eq!(records[0]["draws"], 500);
    assert_eq!(records[1]["draws"], 50);
    assert!(records.iter().all(|r| r["violations"] == 0));
    assert!(records[0]["heisenberg_violations"].as_u64().unwrap() > 0);
    assert!(stderr(&o).lines().count() >= 3);
}

#[test]
fn csv_output_uses_bare_line_feeds() {
    for args in [
        &["sweep", "--analytic"][..],
        &["simulate", "--phi", "0:90:2"],
        &["audit", "--draws", "20"],
    ] {
        let out = ok(args);
        assert!(!out.contains('\r'), "{args:?}");
        assert!(out.ends_with('\n'));
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let direct = ok(&["sweep", "--analytic", "--format", "json"]);
    ok(&[
        "sweep",
        "--analytic",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    let doc: Value = serde_json::from_str(&direct).unwrap();
    assert_eq!(doc["config"]["command"], "sweep");
}

#[test]
fn exit_codes() {
    assert_eq!(unclab(&["--help"]).status.code(), Some(0));
    assert_eq!(unclab(&["--version"]).status.code(), Some(0));
    assert_eq!(unclab(&["sweep", "--bogus"]).status.code(), Some(1));
    assert_eq!(unclab(&["sweep", "--phi", "90:0:5"]).status.code(), Some(1));
    assert_eq!(unclab(&["simulate", "--contrast", "1.5"]).status.code(), Some(1));
    assert_eq!(unclab(&["simulate", "--counts", "0"]).status.code(), Some(1));
    assert_eq!(unclab(&["audit", "--draws", "0"]).status.code(), Some(1));
    assert_eq!(unclab(&["estimate", "/nonexistent/counts.csv"]).status.code(), Some(2));
    let o = unclab(&["sweep", "--analytic", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/dir/out.csv"));
}
