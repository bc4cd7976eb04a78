use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use barotropic_ns::config::OUT_ENV;
use barotropic_ns::output::{load_state, parse_csv, sha256_hex};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_barotropic-ns"))
        .args(args)
        .env_remove(OUT_ENV)
        .output()
        .unwrap()
}

fn cli_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    all.extend(["--out", out]);
    cli(&all)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn steady_preset_writes_hashed_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(tmp.path(), &["steady", "--preset", "fig4", "--N", "80"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "complete");
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    for expected in ["config.resolved.toml", "profile.csv", "profile.svg", "summary.json"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    for f in files {
        let bytes = std::fs::read(tmp.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    let (_, table) = parse_csv(&std::fs::read_to_string(tmp.path().join("profile.csv")).unwrap()).unwrap();
    assert_eq!(table.len(), 81);
    let u_col = 1;
    assert_eq!(table[0][u_col], 0.5);
    assert_eq!(table[80][u_col], 1.0);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(cli_in(&a, &["steady", "--preset", "fig4"]).status.success());
    let echo = a.join("config.resolved.toml");
    let o = cli_in(&b, &["steady", "--config", echo.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Metadata differs (the preset is recorded); the data must not.
    let table = |dir: &Path| parse_csv(&std::fs::read_to_string(dir.join("profile.csv")).unwrap()).unwrap();
    assert!(table(&a) == table(&b));
    let alpha = |dir: &Path| {
        let v: Value = serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap();
        v["alpha_star"].as_f64().unwrap()
    };
    assert_eq!(alpha(&a), alpha(&b));
}

#[test]
fn missing_configuration_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(tmp.path(), &["steady"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for key in [
        "problem.epsilon",
        "problem.pressure",
        "problem.u_minus",
        "problem.u_plus",
    ] {
        assert!(err.contains(key), "{err}");
    }
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn invalid_values_and_presets_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[scheme]\nn = 1\ncfl_hyperbolic = -1.0\n").unwrap();
    let o = cli_in(
        tmp.path(),
        &["evolve", "--preset", "fig4", "--config", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("N must be at least") && err.contains("cfl_hyperbolic"),
        "{err}"
    );
    assert_eq!(
        cli_in(tmp.path(), &["steady", "--preset", "fig9"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cli_in(tmp.path(), &["evolve", "--preset", "fig4", "--initial", "sawtooth"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_run_leaves_partial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(
        tmp.path(),
        &["evolve", "--preset", "fig4", "--initial", "state:/does/not/exist.csv"],
    );
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "partial");
    assert!(m["error"].as_str().unwrap().contains("exist.csv"));
}

#[test]
fn final_state_can_seed_another_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = ["evolve", "--preset", "fig4", "--N", "50", "--T", "0.05"];
    assert!(cli_in(&a, &first).status.success());
    let state = a.join("final_state.csv");
    let s = load_state(&state).unwrap();
    assert_eq!((s.n(), s.t), (50, 0.05));
    let seed = format!("state:{}", state.display());
    let o = cli_in(
        &b,
        &[
            "evolve",
            "--preset",
            "fig4",
            "--N",
            "50",
            "--T",
            "0.05",
            "--initial",
            &seed,
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(&b)["status"], "complete");
}

#[test]
fn output_root_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_barotropic-ns"))
        .args(["steady", "--preset", "fig4", "--N", "40"])
        .env(OUT_ENV, tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("steady-fig4").join("manifest.json").exists());
}

#[test]
fn json_summary_is_machine_readable() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(tmp.path(), &["steady", "--preset", "fig4", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["alpha_star"].as_f64().unwrap() - 0.875045353581745).abs() < 1e-10);
    assert_eq!(v["alpha_bar"].as_f64().unwrap(), 0.875);
}

/// Roots of `-u³/2 + α u - v*²` by bisection on the two monotone branches.
fn cubic_zeros(alpha: f64, v2: f64) -> (f64, f64) {
    let f = |u: f64| -0.5 * u * u * u + alpha * u - v2;
    let peak = (2.0 * alpha / 3.0).sqrt();
    let root = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (root(0.0, peak), root(peak, 10.0 * peak))
}

#[test]
fn g_curves_figure_has_one_curve_per_viscosity() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(tmp.path(), &["figures", "--preset", "fig2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(tmp.path().join("g-curves.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let summary: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["curves"], 3);
    let (u1, u2) = cubic_zeros(400.0, 1000.0);
    // Φ = √u, u, u² for ν = ½u^½, u, 2u².
    let expected = [u1.sqrt(), u2.sqrt(), u1, u2, u1 * u1, u2 * u2];
    let zeros: Vec<f64> = summary["zeros"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z["w"].as_f64().unwrap())
        .collect();
    assert_eq!(zeros.len(), 6);
    for (w, e) in zeros.iter().zip(expected) {
        assert!((w - e).abs() < 1e-9 * e, "{w} vs {e}");
    }
}

#[test]
fn every_figure_preset_renders() {
    let tmp = tempfile::tempdir().unwrap();
    for (preset, file) in [
        ("fig1", "no-connection.svg"),
        ("fig3", "connection.svg"),
        ("fig4", "dynamics.svg"),
    ] {
        let dir = tmp.path().join(preset);
        let mut args = vec!["figures", "--preset", preset];
        if preset == "fig4" {
            args.extend(["--N", "60", "--T", "0.5"]);
        }
        let o = cli_in(&dir, &args);
        assert!(o.status.success(), "{preset}: {}", stderr(&o));
        let svg = std::fs::read_to_string(dir.join(file)).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"), "{preset}");
        assert!(svg.contains("<polyline"));
    }
}

#[test]
fn hyperbolic_check_solves_and_judges_a_jump() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let jump = [
        "hyperbolic-check",
        "--preset",
        "fig4",
        "--rho-minus",
        "0.5",
        "--w-minus",
        "1.2",
        "--rho-plus",
        "1",
    ];
    assert!(cli_in(&a, &jump).status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(a.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"]["admissible"], true);
    let reverse = [
        "hyperbolic-check",
        "--preset",
        "fig4",
        "--rho-minus",
        "1",
        "--w-minus",
        "0.6",
        "--rho-plus",
        "0.5",
    ];
    assert!(cli_in(&b, &reverse).status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(b.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"]["admissible"], false);
}

#[test]
fn sigma_map_marks_the_lower_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli_in(tmp.path(), &["sigma-map", "--preset", "fig4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&std::fs::read_to_string(tmp.path().join("sigma_boundary.csv")).unwrap()).unwrap();
    assert!(!rows.is_empty(), "{header:?}");
}
