use std::path::Path;
use std::process::{Command, Output};

use fano_tunnel_cli::output::parse_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fano-tunnel"))
}

fn run_in(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.current_dir(dir).args(args);
    if let Some(t) = threads {
        cmd.env("FANO_TUNNEL_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (cols, rows) = parse_csv(text).unwrap();
    let i = cols.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn empty_scenario_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "empty.toml", "");
    let out = run_in(dir.path(), &["run", &s], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn malformed_scenario_and_usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "bad.toml", "[model\nepsilon = 1");
    assert_eq!(run_in(dir.path(), &["run", &s], None).status.code(), Some(1));
    assert_eq!(run_in(dir.path(), &["run"], None).status.code(), Some(1));
    assert_eq!(run_in(dir.path(), &["run", "missing.toml"], None).status.code(), Some(1));
    let s = scenario(dir.path(), "ok.toml", "preset = \"fig1\"\n");
    assert_eq!(run_in(dir.path(), &["run", &s], Some("many")).status.code(), Some(1));
}

#[test]
fn fig2_rates_are_decay_dominated_at_short_times() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "f.toml", "preset = \"fig2\"\n");
    let out = run_in(dir.path(), &["run", &s, "--out-dir", "out"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/fig2_closed_rates.csv")).unwrap();
    assert!(text.starts_with("# fano-tunnel rates v1\n"));
    assert!(text.contains("# splitting: closed forms use e_R - e'_R"));
    let t = column(&text, "t");
    let rd = column(&text, "R_d");
    let ru = column(&text, "R_u");
    let pd = column(&text, "P_dot");
    // Dominance holds up to t ~ 0.085, where the rotation of the natural
    // orbitals towards |-> (driven by the decay itself) takes over.
    for i in 1..t.len() {
        if t[i] <= 0.08 {
            assert!(rd[i].abs() > ru[i].abs(), "t = {}", t[i]);
        }
        assert!((rd[i] + ru[i] - pd[i]).abs() < 1e-9);
    }
}

#[test]
fn fig1_probability_approaches_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "f.toml", "preset = \"fig1\"\n[grid]\nt_end = 40.0\nn_points = 801\n");
    assert!(run_in(dir.path(), &["run", &s], None).status.success());
    let text = std::fs::read_to_string(dir.path().join("fig1_closed_trajectory.csv")).unwrap();
    let p = column(&text, "P");
    assert!((p.last().unwrap() - 0.5).abs() < 5e-3);
    // Damped oscillation: P overshoots 1/2 in the first period.
    assert!(p.iter().any(|&x| x > 0.6));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "f.toml",
        "preset = \"fig3\"\nmethods = [\"closed\", \"quadrature\", \"oracle\"]\noracle_bins = 400\noutputs = [\"trajectory_csv\"]\n[grid]\nn_points = 41\n",
    );
    let mut seen = Vec::new();
    for (dir_name, threads) in [("a", "0"), ("b", "1"), ("c", "0")] {
        let out = run_in(dir.path(), &["run", &s, "--out-dir", dir_name], Some(threads));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let files: Vec<Vec<u8>> = ["closed", "quadrature", "oracle", "master"]
            .iter()
            .map(|m| std::fs::read(dir.path().join(dir_name).join(format!("fig3_{m}_trajectory.csv"))).unwrap())
            .collect();
        seen.push(files);
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[0], seen[2]);
}

#[test]
fn compare_writes_schema_and_passes_for_fig3() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "f.toml", "preset = \"fig3\"\n");
    let out = run_in(dir.path(), &["compare", &s], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig3_comparison.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["scenario", "params", "sup_norm_diffs", "fit_residuals", "checks"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 6);
    for c in checks {
        assert!(c["pass"].as_bool().unwrap(), "{c}");
        for key in ["name", "value", "tolerance"] {
            assert!(c.get(key).is_some());
        }
    }
    assert!(v["fit_residuals"]["model_two_exponential"].as_f64().unwrap() < 1e-10);
    assert!(v["fit_residuals"]["master_single_exponential"].as_f64().unwrap() < 1e-10);
    // Only the report is written.
    assert!(!dir.path().join("fig3_closed_trajectory.csv").exists());
}

#[test]
fn numerical_failure_exits_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    // The exact dynamics start with a transient on the inverse band-width
    // scale, which this grid cannot resolve for finite-difference rates.
    let s = scenario(dir.path(), "f.toml", "preset = \"fig3\"\n");
    let out = run_in(dir.path(), &["run", &s, "--method", "quadrature", "--out-dir", "o"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GridTooCoarse"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/failure_report.json")).unwrap()).unwrap();
    assert_eq!(report["module"], "rates");
    assert_eq!(report["error"], "GridTooCoarse");
}

#[test]
fn json_format_and_preset_flag() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "f.toml", "name = \"x\"\noutputs = [\"trajectory_csv\"]\n");
    let out = run_in(dir.path(), &["run", &s, "--preset", "fig1", "--format", "json"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("x_closed_trajectory.json")).unwrap()).unwrap();
    assert_eq!(v["columns"][4], "P");
    assert_eq!(v["rows"].as_array().unwrap().len(), 401);
}

#[test]
fn adiabatic_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "a.toml",
        "name = \"sweep\"\n[adiabatic]\nprefactor = 1e-3\nexponent = 0.5\ncutoffs = [1.0, 10.0, 100.0, 1000.0]\n",
    );
    let out = run_in(dir.path(), &["run", &s], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep_adiabatic.csv")).unwrap();
    let overlap = column(&text, "overlap");
    assert!(overlap.windows(2).all(|w| w[1] > w[0]));
    assert!(*overlap.last().unwrap() >= 0.99);
}
