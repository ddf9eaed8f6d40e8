use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radial-plap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn with_config(cmd: &str, cfg: &Path, out: &Path) -> Output {
    run(&[cmd, "--config", cfg.to_str().unwrap()], out)
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

const SINGULAR: &str = "[problem]\nN = 3\np = 2.0\nq = 3.0\ndelta = 0.5\nlambda = 0.05\neps = 0.0\nR = 1.0\n";

/// Complete `[problem]` table for the regularized problem, followed by `extra`.
fn problem(lambda: f64, extra: &str) -> String {
    format!("[problem]\nN = 3\np = 2.0\nq = 3.0\ndelta = 0.5\nlambda = {lambda:?}\neps = 0.1\nR = 1.0\n{extra}")
}

#[test]
fn print_defaults_parses_back() {
    let dir = TempDir::new().unwrap();
    let o = run(&["--print-defaults"], dir.path());
    assert!(o.status.success());
    let cfg = write_config(&dir, &stdout(&o));
    let o = with_config("eigen", &cfg, &dir.path().join("e"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_command_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&[], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(64));
}

#[test]
fn solve_constant_rhs() {
    let dir = TempDir::new().unwrap();
    let o = with_config("solve", &config("constant_rhs.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["scan.csv", "profile.csv", "profile.svg", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let rows = csv_rows(&dir.path().join("profile.csv"));
    assert_eq!(rows[0], ["r", "u", "du"]);
    let u0: f64 = rows[1][1].parse().unwrap();
    assert!((u0 - 1.0).abs() < 1e-9);
    let scan = csv_rows(&dir.path().join("scan.csv"));
    assert_eq!(scan[0], ["a", "miss", "terminated"]);
    assert_eq!(scan.len(), 17);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn no_forcing_means_no_solution() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &problem(0.0, "[scan]\npoints = 8\n"));
    let out = dir.path().join("out");
    let o = with_config("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(out.join("scan.csv").exists());
    assert!(!out.join("profile.csv").exists());
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[problem]\nN = 3\np = \n");
    let out = dir.path().join("out");
    let o = with_config("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(!out.exists());

    let cfg = write_config(&dir, "[sweep]\nlambdas = [0.2, 0.1]\n");
    assert_eq!(with_config("sweep", &cfg, &out).status.code(), Some(64));
    assert!(!out.exists());
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[sweep]\nlambdas = []\n");
    let o = with_config("sweep", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("bifurcation.csv")).unwrap();
    assert_eq!(text, "lambda,branch,a_star,sup_norm,converged,weak_residual\n");
    assert!(!dir.path().join("mu_probe.csv").exists());
}

#[test]
fn one_point_sweep_matches_solve() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &problem(0.05, "[scan]\npoints = 48\n[sweep]\nlambdas = [0.05]\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(with_config("sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(with_config("solve", &cfg, &b).status.code(), Some(0));
    let sweep = csv_rows(&a.join("bifurcation.csv"));
    let profile = csv_rows(&b.join("profile.csv"));
    let branch0 = sweep.iter().find(|r| r[1] == "0").expect("branch 0");
    assert_eq!(branch0[2], profile[1][1]);
}

#[test]
fn mu_probe_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &format!("{SINGULAR}[scan]\npoints = 32\n[sweep]\nlambdas = []\nmus = [0.0, 1000.0]\n"));
    let o = with_config("sweep", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("mu_probe.csv"));
    assert_eq!(rows[0], ["mu", "exists", "k", "lambda1"]);
    assert_eq!(rows[1][1], "true");
    assert_eq!(rows[2][1], "false");
    let lambda1: f64 = rows[2][3].parse().unwrap();
    assert!((lambda1 / std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-6);
}

#[test]
fn continue_constant_rhs_converges() {
    let dir = TempDir::new().unwrap();
    let o = with_config("continue", &config("constant_rhs.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("eps_path.csv"));
    assert_eq!(rows[0], ["eps", "a_star", "sup_norm", "cauchy_increment"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][3], "");
    assert_eq!(rows[3][3].parse::<f64>().unwrap(), 0.0);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn continue_singular_reports_increments() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &problem(0.05, "[continuation]\nsteps = 4\n"));
    let o = with_config("continue", &cfg, dir.path());
    // increments shrink like eps, far from the default tolerance after 4 steps
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("eps_path.csv"));
    assert_eq!(rows.len(), 5);
    let inc: Vec<f64> = rows[2..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(inc.windows(2).all(|w| w[1] < w[0]));
    assert!(stdout(&o).contains("not Cauchy") || stdout(&o).to_lowercase().contains("cauchy"));
    assert!(!dir.path().join("report.json").exists());

    let loose = write_config(&dir, &problem(0.05, "[continuation]\nsteps = 4\ncauchy_tol = 0.1\n"));
    let out = dir.path().join("loose");
    let o = with_config("continue", &loose, &out);
    // accepted as a limit, but eps = 1.6e-3 is still far from the singular problem
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(out.join("profile.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["weak_residual"]);
}

#[test]
fn eigen_values_and_scaling() {
    let dir = TempDir::new().unwrap();
    let lambda1 = |text: &str, sub: &str| -> f64 {
        let cfg = write_config(&dir, text);
        let out = dir.path().join(sub);
        assert_eq!(with_config("eigen", &cfg, &out).status.code(), Some(0));
        let rows = csv_rows(&out.join("eigen.csv"));
        assert_eq!(rows[0], ["lambda1", "r", "phi", "dphi"]);
        rows[1][0].parse().unwrap()
    };
    let pi2 = std::f64::consts::PI.powi(2);
    let one = lambda1(&problem(0.05, "").replace("N = 3", "N = 1\nunchecked = true"), "n1");
    assert!((one / (pi2 / 4.0) - 1.0).abs() < 1e-6);
    let three = lambda1(&problem(0.05, ""), "n3");
    assert!((three / pi2 - 1.0).abs() < 1e-6);
    let wide = lambda1(&problem(0.05, "").replace("R = 1.0", "R = 2.0"), "r2");
    assert!((wide * 4.0 / three - 1.0).abs() < 1e-8);
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let cfg = config("constant_rhs.toml");
    let solved = dir.path().join("solved");
    assert_eq!(with_config("solve", &cfg, &solved).status.code(), Some(0));
    let checked = dir.path().join("checked");
    let profile = solved.join("profile.csv");
    let o = run(&["verify", profile.to_str().unwrap(), "--config", cfg.to_str().unwrap()], &checked);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(
        fs::read_to_string(solved.join("report.json")).unwrap(),
        fs::read_to_string(checked.join("report.json")).unwrap()
    );

    // push the profile off the boundary condition
    let text = fs::read_to_string(&profile).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.len() - 1;
    let fields: Vec<&str> = lines[last].split(',').collect();
    lines[last] = format!("{},0.01,{}", fields[0], fields[2]);
    let tampered = dir.path().join("tampered.csv");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    let o = run(&["verify", tampered.to_str().unwrap(), "--config", cfg.to_str().unwrap()], &checked);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));

    let missing = dir.path().join("nope.csv");
    let o = run(&["verify", missing.to_str().unwrap(), "--config", cfg.to_str().unwrap()], &checked);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn blowup_pure_power() {
    let dir = TempDir::new().unwrap();
    let o = with_config("blowup", &config("blowup.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("blowup.json")).unwrap()).unwrap();
    let entries = summary["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        assert_eq!(e["v_center"].as_f64().unwrap(), 1.0);
        assert!(e["residual"].as_f64().unwrap() < 1e-6);
    }
    let rows = csv_rows(&dir.path().join("rescaled_profiles.csv"));
    assert_eq!(rows[0], ["H", "M", "x", "v"]);

    let single = write_config(&dir, &problem(1.0, "[blowup]\nheights = [10.0]\n"));
    assert_eq!(with_config("blowup", &single, &dir.path().join("single")).status.code(), Some(64));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &problem(0.05, "[continuation]\nsteps = 3\ncauchy_tol = 0.5\n"));
    let outs: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("run{k}"))).collect();
    let codes: Vec<Option<i32>> = outs.iter().map(|o| with_config("continue", &cfg, o).status.code()).collect();
    assert_eq!(codes[0], codes[1]);
    for f in ["eps_path.csv", "profile.csv", "profile.svg", "report.json"] {
        assert_eq!(fs::read(outs[0].join(f)).unwrap(), fs::read(outs[1].join(f)).unwrap(), "{f}");
    }
}
