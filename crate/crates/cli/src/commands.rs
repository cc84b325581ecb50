use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use gwp_core::dynamics::{integrate, Evolvable, HamiltonianSpec, IntegrationConfig, Trajectory};
use gwp_core::oracle::{verify_exactness, ExactnessConfig, OracleInitial};
use gwp_core::verify::{self, Suite};
use gwp_core::wavepacket::{eval_hagedorn, eval_heller, l2_distance, l2_norm, BranchTracker};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Initial, LoadedConfig};
use crate::CliError;

/// Prefix of the environment variables that override verify tolerances.
pub const TOL_ENV_PREFIX: &str = "GWP_TOL_";

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, &text)
}

/// Maps a core error raised while running to the exit-code classes.
fn run_error(e: gwp_core::Error) -> CliError {
    if e.is_numerical() {
        CliError::Numerical { step: e.step(), message: e.to_string() }
    } else {
        CliError::Config(e.to_string())
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

// ------------------------------------------------------------ simulate

#[derive(Debug, Serialize)]
struct SimulationDiagnostics {
    status: &'static str,
    parametrization: &'static str,
    scheme: gwp_core::dynamics::Scheme,
    steps: usize,
    checkpoints: usize,
    t_final: f64,
    max_noether_drift: Option<f64>,
    max_constraint_residual: Option<f64>,
    max_energy_drift: Option<f64>,
    final_theta: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FailureDiagnostics {
    status: &'static str,
    parametrization: &'static str,
    step: Option<usize>,
    error: String,
}

fn run_and_write<S: Evolvable>(
    initial: &S,
    h: &HamiltonianSpec,
    cfg: &IntegrationConfig,
    stride: usize,
    kind: &'static str,
    csv: &Path,
) -> Result<SimulationDiagnostics, CliError> {
    let traj = integrate(initial, h, cfg).map_err(run_error)?;
    let last = traj.checkpoints.len() - 1;
    let thinned = Trajectory {
        checkpoints: traj
            .checkpoints
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i == last)
            .map(|(_, c)| c.clone())
            .collect(),
        steps: traj.steps,
    };
    write(csv, &thinned.to_csv())?;
    Ok(SimulationDiagnostics {
        status: "ok",
        parametrization: kind,
        scheme: cfg.scheme,
        steps: traj.steps,
        checkpoints: thinned.checkpoints.len(),
        t_final: traj.last().t,
        max_noether_drift: finite(traj.max_noether_drift()),
        max_constraint_residual: finite(traj.max_constraint_residual()),
        max_energy_drift: finite(traj.max_energy_drift()),
        final_theta: traj.last().theta,
    })
}

/// Paths a `simulate` run writes to.
pub fn simulate_outputs(cfg: &LoadedConfig) -> [PathBuf; 2] {
    [cfg.resolve(&cfg.config.outputs.trajectory), cfg.resolve(&cfg.config.outputs.diagnostics)]
}

pub fn simulate(cfg: &LoadedConfig) -> Result<String, CliError> {
    let c = &cfg.config;
    let h = c.hamiltonian()?;
    let icfg = c.integration();
    let [csv, diag] = simulate_outputs(cfg);
    let stride = c.outputs.checkpoint_stride;
    let kind = c.initial_state.kind();
    let result = match c.initial()? {
        Initial::Heller(s) => run_and_write(&s, &h, &icfg, stride, kind, &csv),
        Initial::Hagedorn(s) => run_and_write(&s, &h, &icfg, stride, kind, &csv),
        Initial::Frame(s) => run_and_write(&s, &h, &icfg, stride, kind, &csv),
        Initial::Reduced(s) => run_and_write(&s, &h, &icfg, stride, kind, &csv),
    };
    match result {
        Ok(d) => {
            write_json(&diag, &d)?;
            Ok(format!(
                "{} steps, {} checkpoints -> {}\nmax noether drift {}, max constraint residual {}, max energy drift {}",
                d.steps,
                d.checkpoints,
                csv.display(),
                fmt_opt(d.max_noether_drift),
                fmt_opt(d.max_constraint_residual),
                fmt_opt(d.max_energy_drift),
            ))
        }
        Err(CliError::Numerical { step, message }) => {
            let f = FailureDiagnostics { status: "numerical_failure", parametrization: kind, step, error: message.clone() };
            write_json(&diag, &f)?;
            Err(CliError::Numerical { step, message })
        }
        Err(e) => Err(e),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"))
}

// -------------------------------------------------------------- verify

/// Reads `GWP_TOL_<PROPERTY>` overrides from the given variables.
pub fn tolerance_overrides(vars: impl Iterator<Item = (String, String)>) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for (k, v) in vars {
        if let Some(name) = k.strip_prefix(TOL_ENV_PREFIX) {
            let tol: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{k}: '{v}' is not a number")))?;
            out.insert(name.to_ascii_lowercase(), tol);
        }
    }
    Ok(out)
}

/// Runs a suite and renders its table. Returns the table and whether all
/// properties passed.
pub fn verify(suite: Suite, seed: u64, samples: usize, overrides: &BTreeMap<String, f64>) -> Result<(String, bool), CliError> {
    let rows = verify::run_suite(suite, seed, samples, overrides).map_err(|e| match e {
        gwp_core::Error::Invalid(m) => CliError::Config(m),
        other => CliError::Verify(other.to_string()),
    })?;
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
    let mut out = format!("{:<width$}  {:>7}  {:>12}  {:>12}  result\n", "property", "samples", "measured", "tolerance");
    for r in &rows {
        out.push_str(&format!(
            "{:<width$}  {:>7}  {:>12.3e}  {} {:>9.1e}  {}\n",
            r.name,
            r.samples,
            r.value,
            r.bound_symbol(),
            r.tol,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} properties passed (suite {suite}, seed {seed})\n", rows.len()));
    Ok((out, passed == rows.len()))
}

// -------------------------------------------------------- wavefunction

#[derive(Debug, Serialize)]
struct ComparisonEntry {
    t: f64,
    hagedorn_csv: String,
    heller_csv: String,
    l2_distance: f64,
    norm_hagedorn: f64,
    norm_heller: f64,
    theta: f64,
}

#[derive(Debug, Serialize)]
struct Comparison {
    hbar: f64,
    scheme: gwp_core::dynamics::Scheme,
    entries: Vec<ComparisonEntry>,
    max_l2_distance: f64,
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn wavefunction(cfg: &LoadedConfig, times: &[f64]) -> Result<String, CliError> {
    let c = &cfg.config;
    let grid = c.require_grid()?;
    let icfg = c.integration();
    if times.is_empty() {
        return Err(CliError::Config("--times needs at least one value".into()));
    }
    for &t in times {
        if !(t >= 0.0 && t <= icfg.t_final * (1.0 + 1e-12)) {
            return Err(CliError::Config(format!("time {t} lies outside [0, t_final = {}]", icfg.t_final)));
        }
    }
    let h = c.hamiltonian()?;
    let initial = c.initial()?;
    let hag0 = initial.to_hagedorn(c.hbar)?;
    let hel0 = initial.to_heller(c.hbar)?;
    let theta0 = hag0.det_q().arg();
    let prefix = cfg.resolve(&c.outputs.wavefunction_prefix);
    let mut entries = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let run = IntegrationConfig { t_final: t, invariant_check_every: usize::MAX, ..icfg.clone() };
        let (hag, theta) = if t == 0.0 {
            (hag0.clone(), theta0)
        } else {
            let tr = integrate(&hag0, &h, &run).map_err(run_error)?;
            let end = tr.last();
            (end.state.clone(), end.theta.unwrap_or(theta0))
        };
        let hel = if t == 0.0 {
            hel0.clone()
        } else {
            integrate(&hel0, &h, &run).map_err(run_error)?.final_state().clone()
        };
        let tracker = BranchTracker::with_theta(hag.det_q(), theta).map_err(run_error)?;
        let f_hag = eval_hagedorn(&hag, grid, c.hbar, &tracker).map_err(run_error)?;
        let f_hel = eval_heller(&hel, grid, c.hbar).map_err(run_error)?;
        let p_hag = PathBuf::from(format!("{}_t{i}_hagedorn.csv", prefix.display()));
        let p_hel = PathBuf::from(format!("{}_t{i}_heller.csv", prefix.display()));
        write(&p_hag, &f_hag.to_csv())?;
        write(&p_hel, &f_hel.to_csv())?;
        entries.push(ComparisonEntry {
            t,
            hagedorn_csv: file_name(&p_hag),
            heller_csv: file_name(&p_hel),
            l2_distance: l2_distance(&f_hag, &f_hel).map_err(run_error)?,
            norm_hagedorn: l2_norm(&f_hag),
            norm_heller: l2_norm(&f_hel),
            theta,
        });
    }
    let max_l2_distance = entries.iter().map(|e| e.l2_distance).fold(0.0, f64::max);
    let report = Comparison { hbar: c.hbar, scheme: icfg.scheme, entries, max_l2_distance };
    let path = cfg.resolve(&c.outputs.comparison);
    write_json(&path, &report)?;
    Ok(format!(
        "{} times, max L2 distance between parametrizations {:.3e} -> {}",
        times.len(),
        max_l2_distance,
        path.display()
    ))
}

// -------------------------------------------------------------- oracle

/// Runs the oracle comparison. Returns the summary line and whether the
/// error stayed below the threshold.
pub fn oracle(cfg: &LoadedConfig) -> Result<(String, bool), CliError> {
    let c = &cfg.config;
    let grid = c.require_grid()?;
    if c.n != 1 {
        return Err(CliError::Config(format!("the oracle is one-dimensional, but n = {}", c.n)));
    }
    let section = c.oracle.clone().unwrap_or_default();
    let h = c.hamiltonian()?;
    let initial = c.initial()?;
    let start = match &initial {
        Initial::Heller(_) | Initial::Reduced(_) => OracleInitial::Heller(initial.to_heller(c.hbar)?),
        Initial::Hagedorn(_) | Initial::Frame(_) => OracleInitial::Hagedorn(initial.to_hagedorn(c.hbar)?),
    };
    let ecfg = ExactnessConfig {
        grid: grid.clone(),
        hbar: c.hbar,
        t_final: c.integration.t_final,
        dt: section.dt,
        checkpoints: section.checkpoints,
    };
    let report = verify_exactness(&start, &h, &ecfg).map_err(run_error)?;
    let path = cfg.resolve(&c.outputs.oracle_report);
    write_json(&path, &report)?;
    let pass = report.max_error <= section.threshold;
    Ok((
        format!(
            "max L2 error {:.6e} (threshold {:.1e}): {} -> {}",
            report.max_error,
            section.threshold,
            if pass { "PASS" } else { "FAIL" },
            path.display()
        ),
        pass,
    ))
}

// --------------------------------------------------------------- sweep

#[derive(Debug, Serialize)]
struct ManifestEntry {
    config: String,
    exit_code: i32,
    outputs: Vec<String>,
    message: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    runs: Vec<ManifestEntry>,
    failed: usize,
}

/// Runs `simulate` for every config, concurrently unless `sequential`.
/// The manifest is written once, after all runs finish, in input order.
pub fn sweep(configs: &[PathBuf], manifest: &Path, sequential: bool) -> Result<(String, i32), CliError> {
    let loaded: Vec<LoadedConfig> = configs.iter().map(|p| LoadedConfig::load(p)).collect::<Result<_, _>>()?;
    let mut seen = BTreeSet::new();
    for (p, cfg) in configs.iter().zip(&loaded) {
        for out in simulate_outputs(cfg) {
            if !seen.insert(out.clone()) {
                return Err(CliError::Config(format!(
                    "{}: output {} is shared with another config in the sweep",
                    p.display(),
                    out.display()
                )));
            }
        }
    }
    let run = |cfg: &LoadedConfig| match simulate(cfg) {
        Ok(msg) => (0, msg),
        Err(e) => (e.exit_code(), e.to_string()),
    };
    let results: Vec<(i32, String)> = if sequential {
        loaded.iter().map(run).collect()
    } else {
        loaded.par_iter().map(run).collect()
    };
    let runs: Vec<ManifestEntry> = configs
        .iter()
        .zip(&loaded)
        .zip(results)
        .map(|((p, cfg), (exit_code, message))| ManifestEntry {
            config: p.display().to_string(),
            exit_code,
            outputs: simulate_outputs(cfg).iter().map(|o| o.display().to_string()).collect(),
            message,
        })
        .collect();
    let failed = runs.iter().filter(|r| r.exit_code != 0).count();
    let worst = runs.iter().map(|r| r.exit_code).max().unwrap_or(0);
    let total = runs.len();
    write_json(manifest, &Manifest { runs, failed })?;
    Ok((format!("{total} runs, {failed} failed -> {}", manifest.display()), worst))
}
