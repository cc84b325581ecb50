use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gwp(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gwp"));
    cmd.args(args).current_dir(dir);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("gwp runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_config(text: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, text).unwrap();
    (dir, path)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn repo_config(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

const HARMONIC: &str = r#"{
  "n": 1,
  "hamiltonian": {"type": "harmonic"},
  "initial_state": {"type": "hagedorn", "q": [1.0], "p": [0.0]},
  "integration": {"dt": 0.001, "t_final": 10.0, "scheme": "exact_quadratic", "invariant_check_every": 100},
  "grid": {"axes": [{"min": -10.0, "max": 10.0, "count": 2001}]}
}"#;

#[test]
fn simulate_harmonic_conserves_noether_momentum() {
    let (dir, _) = with_config(HARMONIC);
    let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let drift = column(&csv, "noether_drift");
    assert_eq!(drift.len(), 101);
    assert!(drift.iter().all(|d| *d <= 1e-11));
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["status"], "ok");
    assert_eq!(diag["steps"], 10000);
}

#[test]
fn malformed_config_names_the_key() {
    let (dir, _) = with_config(&HARMONIC.replace("\"dt\"", "\"dtt\""));
    let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("integration") && stderr(&out).contains("dtt"), "{}", stderr(&out));

    let (dir, _) = with_config("{ not json");
    assert_eq!(code(&gwp(dir.path(), &["simulate", "run.json"], &[])), 2);

    let (dir, _) = with_config(&HARMONIC.replace("\"q\": [1.0]", "\"q\": [1.0, 2.0]"));
    let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("length"), "{}", stderr(&out));
}

#[test]
fn quartic_rk4_populates_energy_drift() {
    let (dir, _) = with_config(&repo_config("quartic_rk4.json"));
    let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out/quartic_trajectory.csv")).unwrap();
    let drift = column(&csv, "energy_drift");
    assert_eq!(drift.len(), 201);
    assert!(drift.iter().all(|d| d.is_finite()));
    assert!(drift.iter().any(|d| *d > 0.0));
}

#[test]
fn blow_up_exits_3_with_failing_step() {
    let cfg = r#"{
      "n": 1,
      "hamiltonian": {"type": "separable", "potential": [{"coeff": -1.0, "powers": [6]}]},
      "initial_state": {"type": "heller", "q": [2.0], "p": [0.0]},
      "integration": {"dt": 0.1, "t_final": 10.0, "scheme": "rk4", "invariant_check_every": 1}
    }"#;
    let (dir, _) = with_config(cfg);
    let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
    assert_eq!(code(&out), 3);
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["status"], "numerical_failure");
    assert!(diag["step"].as_u64().unwrap() > 0);
}

#[test]
fn exact_scheme_rejects_anharmonic_potential() {
    let (dir, _) = with_config(&repo_config("quartic_rk4.json").replace("\"rk4\"", "\"exact_quadratic\""));
    assert_eq!(code(&gwp(dir.path(), &["simulate", "run.json"], &[])), 2);
}

#[test]
fn verify_core_passes_and_reports_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwp(dir.path(), &["verify", "core", "--seed", "7", "--samples", "200"], &[]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let table = stdout(&out);
    for name in ["j_sp_equivariance", "group_and_algebra_membership", "metric_identities"] {
        assert!(table.contains(name), "{table}");
    }
    assert!(!table.contains("FAIL"));
}

#[test]
fn verify_reduction_reports_proportionality() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwp(dir.path(), &["verify", "reduction", "--seed", "7", "--samples", "50"], &[]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("kks_half_siegel_at_iI"));
}

#[test]
fn verify_tolerance_override_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "core", "--samples", "10"];
    let out = gwp(dir.path(), &args, &[("GWP_TOL_J_SP_EQUIVARIANCE", "1e-30")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
    assert_eq!(code(&gwp(dir.path(), &args, &[("GWP_TOL_J_SP_EQUIVARIANCE", "tiny")])), 2);
    assert_eq!(code(&gwp(dir.path(), &args, &[("GWP_TOL_NO_SUCH_PROPERTY", "1")])), 2);
    assert_eq!(code(&gwp(dir.path(), &["verify", "everything"], &[])), 2);
}

#[test]
fn wavefunction_parametrizations_agree() {
    let (dir, _) = with_config(HARMONIC);
    let out = gwp(dir.path(), &["wavefunction", "run.json", "--times", "0,1.5707963267948966,3.141592653589793"], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for i in 0..3 {
        for kind in ["hagedorn", "heller"] {
            assert!(dir.path().join(format!("wavefunction_t{i}_{kind}.csv")).exists());
        }
    }
    let cmp: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    let entries = cmp["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries.iter().all(|e| e["l2_distance"].as_f64().unwrap() <= 1e-7));
}

#[test]
fn wavefunction_rejects_time_past_t_final() {
    let (dir, _) = with_config(HARMONIC);
    let out = gwp(dir.path(), &["wavefunction", "run.json", "--times", "1,11"], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("t_final"));
}

#[test]
fn free_packet_peak_decays() {
    let (dir, _) = with_config(&repo_config("free_spreading.json"));
    let out = gwp(dir.path(), &["wavefunction", "run.json", "--times", "0,1,2,4"], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let peak: Vec<f64> = (0..4)
        .map(|i| {
            let csv = fs::read_to_string(dir.path().join(format!("out/free_psi_t{i}_heller.csv"))).unwrap();
            let x = column(&csv, "x");
            let rho = column(&csv, "abs2");
            let k = x.iter().position(|x| x.abs() < 1e-9).unwrap();
            rho[k]
        })
        .collect();
    assert!(peak.windows(2).all(|w| w[1] < w[0]), "{peak:?}");
    // |ψ(0,t)|² = 1/√(π(1+t²)) for the unit-width packet at rest.
    for (t, p) in [0.0f64, 1.0, 2.0, 4.0].iter().zip(&peak) {
        let expected = 1.0 / (std::f64::consts::PI * (1.0 + t * t)).sqrt();
        assert!((p - expected).abs() < 1e-10, "t = {t}: {p} vs {expected}");
    }
}

#[test]
fn oracle_threshold_and_negative_control() {
    let (dir, _) = with_config(&repo_config("harmonic_coherent.json").replace("\"t_final\": 10.0", "\"t_final\": 2.0"));
    let out = gwp(dir.path(), &["oracle", "run.json"], &[]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(dir.path().join("out/harmonic_oracle.json").exists());

    let (dir, _) = with_config(&repo_config("quartic_rk4.json").replace("\"t_final\": 10.0", "\"t_final\": 2.0"));
    assert_eq!(code(&gwp(dir.path(), &["oracle", "run.json"], &[])), 1);

    let no_grid = HARMONIC.replace(r#""grid": {"axes": [{"min": -10.0, "max": 10.0, "count": 2001}]}"#, r#""seed": 1"#);
    let (dir, _) = with_config(&no_grid);
    let out = gwp(dir.path(), &["oracle", "run.json"], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("grid"));
}

#[test]
fn sweep_rejects_shared_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.json"), HARMONIC).unwrap();
    fs::write(dir.path().join("b.json"), HARMONIC).unwrap();
    let out = gwp(dir.path(), &["sweep", "a.json", "b.json"], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("shared"));
}

#[test]
fn sample_configs_run() {
    for name in ["anharmonic_2d_frame.json", "reduced_squeezed.json", "harmonic_coherent.json"] {
        let (dir, _) = with_config(&repo_config(name));
        let out = gwp(dir.path(), &["simulate", "run.json"], &[]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
    }
}
