use std::path::Path;
use std::process::{Command, Output};

use boltzmann_lab::io::read_snapshots_csv;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boltzmann-lab"))
        .args(args)
        .env_remove("BOLTZMANN_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_of(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    let line = text
        .lines()
        .find(|l| l.starts_with(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{text}"));
    line[prefix.len()..].trim().parse().unwrap()
}

#[test]
fn exponents_default_kernel() {
    let o = lab(&["exponents"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regime = FULL"));
    assert!((value_of(&text, "p1") - 2.875).abs() < 1e-12);
    assert!((value_of(&text, "chi") - 7.0 / 23.0).abs() < 1e-12);
}

#[test]
fn exponents_at_three_dimensional_boundary() {
    let text = stdout(&lab(&["exponents", "--s", "9"]));
    assert!(text.contains("nu = 0.25, gamma = 0.5"));
    assert!(text.contains("density_regime (s > 9) = false"));
    assert!(text.contains("boundary"));
}

#[test]
fn exponents_outside_every_regime() {
    let o = lab(&["exponents", "--nu", "0.4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regime = NONE"));
    assert!(text.contains("alpha_* = absent"));
}

#[test]
fn invalid_nu_exits_with_config_error() {
    let o = lab(&["exponents", "--nu", "0.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel.nu"));
}

#[test]
fn exponents_json_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["exponents", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exponents.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["regime"], "FULL");
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

#[test]
fn dirac_start_never_moves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kernel": {"nu": 0.05, "gamma": 1.0, "lambda": 1.5, "lambda_prime": 1.0},
        "schedules": [{"epsilon": 0.01}],
        "sim": {"n": 200, "t_end": 0.5, "snapshot_times": [0.25, 0.5], "seed": 3,
                "initial_law": {"law": "dirac", "v0": [0.7, -1.2]}}}"#;
    let o = simulate(dir.path(), &["--config", cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let groups = read_snapshots_csv(&dir.path().join("snapshots.csv")).unwrap();
    assert_eq!(groups.len(), 3);
    for g in &groups {
        assert!(g.velocities.iter().all(|v| v.x == 0.7 && v.y == -1.2));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--n", "300", "--t-end", "0.3", "--seed", "11", "--zeta", "0.2"];
    assert!(simulate(a.path(), &args).status.success());
    assert!(simulate(b.path(), &args).status.success());
    let x = std::fs::read(a.path().join("snapshots.csv")).unwrap();
    let y = std::fs::read(b.path().join("snapshots.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn replicas_match_single_runs_with_offsets() {
    let common = ["--n", "100", "--t-end", "0.2", "--seed", "5", "--zeta", "0.2"];
    let all = tempfile::tempdir().unwrap();
    let mut args = common.to_vec();
    args.extend_from_slice(&["--replicas", "4"]);
    assert!(simulate(all.path(), &args).status.success());
    let pooled = read_snapshots_csv(&all.path().join("snapshots.csv")).unwrap();

    for r in 0..4u64 {
        let one = tempfile::tempdir().unwrap();
        let offset = r.to_string();
        let mut args = common.to_vec();
        args.extend_from_slice(&["--replica-offset", &offset]);
        assert!(simulate(one.path(), &args).status.success());
        let single = read_snapshots_csv(&one.path().join("snapshots.csv")).unwrap();
        for g in &single {
            let same = pooled
                .iter()
                .find(|p| p.replica == r && p.t == g.t)
                .expect("replica present in pooled run");
            assert_eq!(same, g);
        }
    }
}

#[test]
fn manifest_records_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(dir.path(), &["--n", "50", "--t-end", "0.1", "--seed", "2", "--replicas", "2"]).status.success());
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["replicas"].as_array().unwrap().len(), 2);
    assert_eq!(m["config"]["sim"]["seed"], 2);
    assert!(m["total_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_names_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "replica,t,particle,vx,running_max\n0,0,0,1,1\n").unwrap();
    let o = lab(&["analyze", "--input", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`vy`"));
}

fn write_cloud(path: &Path, velocities: &[(f64, f64)]) {
    let mut text = String::from("replica,t,particle,vx,vy,running_max\n");
    for (i, (x, y)) in velocities.iter().enumerate() {
        let r = x.hypot(*y);
        text.push_str(&format!("0,1,{i},{x:.17e},{y:.17e},{r:.17e}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn analyze_reports_empty_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let pts: Vec<(f64, f64)> = (0..400)
        .map(|i| {
            let a = i as f64 * 0.61803398875 * std::f64::consts::TAU;
            let r = 0.5 * ((i % 20) as f64 + 0.5) / 20.0;
            (r * a.cos(), r * a.sin())
        })
        .collect();
    write_cloud(&p, &pts);
    let cfg = r#"{"kernel": {"nu": 0.05, "gamma": 1.0, "lambda": 1.5, "lambda_prime": 1.0},
        "schedules": [{"epsilon": 0.01}],
        "sim": {"n": 400, "t_end": 1.0},
        "analysis": {"annulus": [30.0, 40.0], "weighted": false}}"#;
    let o = lab(&["analyze", "--config", cfg, "--input", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fit error"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    assert!(doc["spatial_fits"][0]["fit_error"].is_string());
}

#[test]
fn analyze_recovers_exponential_decay() {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Gamma};

    // density ∝ exp(-|v|) in 2D: radius ~ Gamma(2, 1), uniform angle
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let radius = Gamma::new(2.0, 1.0).unwrap();
    let pts: Vec<(f64, f64)> = (0..200_000)
        .map(|_| {
            let r: f64 = radius.sample(&mut rng);
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            (r * a.cos(), r * a.sin())
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    write_cloud(&p, &pts);
    let cfg = r#"{"kernel": {"nu": 0.05, "gamma": 1.0, "lambda": 1.5, "lambda_prime": 1.0},
        "schedules": [{"epsilon": 0.01}],
        "sim": {"n": 200000, "t_end": 1.0},
        "analysis": {"annulus": [2.0, 6.0], "weighted": false, "grid": {"x_min": -8.0, "x_max": 8.0, "nx": 161, "y_min": -8.0, "y_max": 8.0, "ny": 161}}}"#;
    let o = lab(&["analyze", "--config", cfg, "--input", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    let slope = doc["spatial_fits"][0]["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    assert!(dir.path().join("tails.csv").exists());
    assert!(dir.path().join("density_000.csv").exists());
}

#[test]
fn verify_subset_passes() {
    let o = lab(&["verify", "--only", "A1,A3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS A1"));
    assert!(text.contains("PASS A3"));
}

#[test]
fn verify_rejects_unknown_criterion() {
    let o = lab(&["verify", "--only", "A99"]);
    assert_eq!(o.status.code(), Some(2));
}
