use std::fs;
use std::path::Path;
use std::process::Command;

fn densgeo(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_densgeo"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn shoot_writes_trajectories_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"shoot": {"r_t0": [-0.2, 0.0, 0.2], "n_steps": 400}}"#).unwrap();
    let out = densgeo(dir.path(), &["shoot", "--config", cfg.to_str().unwrap(), "--svg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["shoot_00.csv", "shoot_01.csv", "shoot_02.csv", "planar.csv", "shoot.svg"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(dir.path().join("shoot_01.csv")).unwrap();
    assert!(csv.starts_with("t,s,r,theta,s_t,theta_t,A0_drift\n"));
    assert_eq!(csv.lines().count(), 402);
}

#[test]
fn output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(densgeo(d.path(), &["shoot", "--preset", "extended", "--steps", "300"]).status.success());
        assert!(densgeo(d.path(), &["report", "--preset", "fisher_rao"]).status.success());
    }
    for name in ["shoot_00.csv", "planar.csv", "report.txt"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn boundary_hit_writes_partial_path_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"coefficients": {"preset": "fisher_rao"},
            "shoot": {"r_t0": [-1.0], "psi_norm": 0.0, "t_end": 3.0, "n_steps": 300}}"#,
    )
    .unwrap();
    let out = densgeo(dir.path(), &["shoot", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("shoot_00.csv")).unwrap();
    assert!(csv.lines().count() > 2);
}

#[test]
fn connect_report_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = densgeo(dir.path(), &["connect", "--preset", "reciprocal", "--tol", "1e-9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("connect_summary.txt")).unwrap();
    let d: f64 = summary.lines().next().unwrap().split('=').nth(1).unwrap().trim().parse().unwrap();
    // default endpoints: r 1 → e, quarter turn
    let exact = (4.0f64 + std::f64::consts::PI.powi(2)).sqrt();
    assert!((d - exact).abs() < 1e-6 * exact, "{d} vs {exact}");

    let out = densgeo(dir.path(), &["report", "--preset", "extended"]);
    assert!(out.status.success());
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("curvature table"));

    let out = densgeo(dir.path(), &["profile", "--preset", "sphere_completion"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"shoot": {"r_t0": "fast"}}"#).unwrap();
    let out = densgeo(dir.path(), &["shoot", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = densgeo(dir.path(), &["report", "--preset", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = densgeo(dir.path(), &["shoot", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = densgeo(dir.path(), &["config", "--preset", "cone(0.5)"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = densgeo::cli::RunConfig::from_json(&text).unwrap();
    assert_eq!(cfg.to_json().trim(), text.trim());
}
