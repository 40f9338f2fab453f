use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use probreg_core::data::Case;
use probreg_core::metrics::{table1_nll, ModelKind, Protocol};

fn probreg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probreg")).args(args).arg("--out").arg(out).env_remove("PROBREG_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&probreg(&["run", "--case", "E"], d.path())), 2);
    assert_eq!(code(&probreg(&["run", "--model", "gp"], d.path())), 2);
    assert_eq!(code(&probreg(&["run", "--epochs", "0"], d.path())), 2);
    assert_eq!(code(&probreg(&["run", "--seed", "x"], d.path())), 2);
    let cfg = d.path().join("bad.json");
    fs::write(&cfg, r#"{"epochz": 3}"#).unwrap();
    assert_eq!(code(&probreg(&["run", "--config", cfg.to_str().unwrap()], d.path())), 2);
}

#[test]
fn verify_names_the_failing_config_check() {
    let d = tempfile::tempdir().unwrap();
    let o = probreg(&["verify", "--epochs", "0", "--case", "A", "--seed", "0"], d.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL config: epochs must be positive"));
}

#[test]
fn short_run_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let o = probreg(&["run", "--case", "A", "--model", "mdn", "--seed", "0", "--epochs", "30"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(d.path().join("A_mdn_s0_grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some("x,true_f,mean,std_epistemic,std_total"));
    assert_eq!(lines.count(), 500);
    let svg = fs::read_to_string(d.path().join("A_mdn_s0_plot.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 800);
    let mean_curve = svg.lines().filter(|l| l.starts_with("<polyline")).last().unwrap();
    assert_eq!(mean_curve.matches(',').count(), 500);
    for name in ["A_mdn_s0_model.json", "A_mdn_s0_loss.csv", "A_mdn_s0_metrics.csv", "data_A_s0.csv", "summary.csv", "metrics.csv"] {
        assert!(d.path().join(name).exists(), "{name}");
    }
    let loss = fs::read_to_string(d.path().join("A_mdn_s0_loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 31);
}

#[test]
fn summary_matches_library_values_exactly() {
    let d = tempfile::tempdir().unwrap();
    let o = probreg(&["run", "--case", "D", "--seed", "3", "--epochs", "25"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(d.path().join("summary.csv")).unwrap();
    let p = Protocol::default().with_epochs(25);
    let mdn = table1_nll(ModelKind::Mdn, Case::SinusoidalD, 3, &p).unwrap();
    let bnn = table1_nll(ModelKind::Bnn, Case::SinusoidalD, 3, &p).unwrap();
    assert_eq!(summary, format!("case,seed,mdn_nll,bnn_nll\nD,3,{mdn},{bnn}\n"));
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"case": "B", "model": "bnn", "seeds": [5, 6], "epochs": 10, "mc_draws": 4, "sigma_obs": 0.1}"#).unwrap();
    let o = probreg(&["run", "--config", cfg.to_str().unwrap(), "--seed", "7"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("B_bnn_s7_grid.csv").exists());
    assert!(!d.path().join("B_bnn_s5_grid.csv").exists());
    let loss = fs::read_to_string(d.path().join("B_bnn_s7_loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 11);
    let metrics = fs::read_to_string(d.path().join("B_bnn_s7_metrics.csv")).unwrap();
    assert!(metrics.contains("B,bnn,7,sigma_obs,0.1"));
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_probreg"))
        .args(["export-dataset", "--case", "intro", "--seed", "2", "--n", "50"])
        .env("PROBREG_OUT", d.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = fs::read_to_string(d.path().join("data_intro_s2.csv")).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text.lines().filter(|l| l.ends_with(",test")).count(), 10);
}

#[test]
fn export_matches_run_dataset() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(probreg(&["export-dataset", "--case", "all", "--seed", "1"], a.path()).status.success());
    assert!(probreg(&["run", "--case", "C", "--model", "mdn", "--seed", "1", "--epochs", "2"], b.path()).status.success());
    let name = "data_C_s1.csv";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    assert_eq!(fs::read_dir(a.path()).unwrap().count(), 4);
}
