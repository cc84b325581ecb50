//! Independent checks: a one-dimensional Crank–Nicolson Schrödinger solver
//! and finite-difference tests of the lifted vector fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branch::BranchTracker;
use crate::dynamics::fields::{lifted_hamiltonian_raw, vector_field_frame_raw, vector_field_reduced_raw};
use crate::dynamics::hamiltonian::{HamiltonianSpec, Polynomial};
use crate::dynamics::integrate::{integrate, IntegrationConfig, Scheme};
use crate::dynamics::state::{HagedornState, HellerState};
use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};
use crate::symplectic::{self, FrameMatrix};
use crate::wavepacket::{eval_hagedorn, eval_heller, l2_distance, l2_norm, SpatialGrid, WaveField};

/// Largest admissible `|ψ|` near the Dirichlet walls.
pub const CN_BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerConfig {
    grid: SpatialGrid,
    hbar: f64,
    mass: f64,
    potential: Vec<f64>,
    dt: f64,
    steps: usize,
}

impl SchrodingerConfig {
    pub fn new(grid: SpatialGrid, hbar: f64, mass: f64, potential: Vec<f64>, dt: f64, steps: usize) -> Result<Self> {
        if grid.n() != 1 {
            return Err(Error::Unsupported("the Schrödinger oracle is one-dimensional".into()));
        }
        if potential.len() != grid.len() {
            return Err(Error::dims(grid.len(), potential.len()));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (name, x) in [("hbar", hbar), ("mass", mass), ("dt", dt)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(SchrodingerConfig { grid, hbar, mass, potential, dt, steps })
    }

    /// Samples a polynomial potential on the grid.
    pub fn from_polynomial(
        grid: SpatialGrid,
        hbar: f64,
        mass: f64,
        v: &Polynomial,
        dt: f64,
        steps: usize,
    ) -> Result<Self> {
        if v.n() != 1 {
            return Err(Error::Unsupported("the Schrödinger oracle is one-dimensional".into()));
        }
        let potential = (0..grid.len()).map(|k| v.eval(grid.point(k).as_slice())).collect();
        Self::new(grid, hbar, mass, potential, dt, steps)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Factored Crank–Nicolson step with homogeneous Dirichlet walls.
///
/// Interior unknowns solve `(I + iΔt/2ħ Ĥ) ψ' = (I − iΔt/2ħ Ĥ) ψ` with
/// `Ĥ = −(ħ²/2m) D₂ + V` and the three-point Laplacian `D₂`.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    /// Diagonal of `Ĥ` at interior points.
    diag: Vec<f64>,
    off: f64,
    alpha: Complex64,
    /// Thomas-algorithm forward sweep: modified super-diagonal and pivots.
    c_prime: Vec<Complex64>,
    pivots: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(cfg: &SchrodingerConfig) -> Self {
        let dx = cfg.grid.axes()[0].spacing();
        let kin = cfg.hbar * cfg.hbar / (cfg.mass * dx * dx);
        let m = cfg.grid.len() - 2;
        let diag: Vec<f64> = (1..=m).map(|k| kin + cfg.potential[k]).collect();
        let off = -0.5 * kin;
        let alpha = Complex64::new(0.0, 0.5 * cfg.dt / cfg.hbar);
        let a_off = alpha * off;
        let mut c_prime = vec![Complex64::new(0.0, 0.0); m];
        let mut pivots = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let b = Complex64::new(1.0, 0.0) + alpha * diag[i];
            let pivot = if i == 0 { b } else { b - a_off * c_prime[i - 1] };
            pivots[i] = pivot;
            c_prime[i] = a_off / pivot;
        }
        CrankNicolson { diag, off, alpha, c_prime, pivots }
    }

    /// Advances the interior values in place; `psi` includes the two walls,
    /// which are kept at zero.
    pub fn step(&self, psi: &mut [Complex64]) {
        let m = self.diag.len();
        let a_off = self.alpha * self.off;
        let mut rhs: Vec<Complex64> = (0..m)
            .map(|i| {
                let mut h = psi[i + 1] * self.diag[i];
                h += (psi[i] + psi[i + 2]) * self.off;
                psi[i + 1] - self.alpha * h
            })
            .collect();
        rhs[0] /= self.pivots[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - a_off * rhs[i - 1]) / self.pivots[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] = rhs[i] - self.c_prime[i] * rhs[i + 1];
        }
        psi[0] = Complex64::new(0.0, 0.0);
        psi[m + 1] = Complex64::new(0.0, 0.0);
        psi[1..=m].copy_from_slice(&rhs);
    }
}

fn edge_magnitude(psi: &[Complex64]) -> f64 {
    let n = psi.len();
    [0, 1, n - 2, n - 1].iter().map(|&k| psi[k].norm()).fold(0.0, f64::max)
}

fn check_edges(psi: &[Complex64], step: usize) -> Result<()> {
    let magnitude = edge_magnitude(psi);
    if !magnitude.is_finite() || psi.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFiniteState { step });
    }
    if magnitude > CN_BOUNDARY_TOL {
        return Err(Error::BoundaryMass { step, magnitude, tol: CN_BOUNDARY_TOL });
    }
    Ok(())
}

/// Runs `cfg.steps` Crank–Nicolson steps. Fails if `|ψ|` at the two
/// outermost points on either side exceeds `1e-10` at any step.
pub fn crank_nicolson_evolve(psi0: &WaveField, cfg: &SchrodingerConfig) -> Result<WaveField> {
    if psi0.grid() != &cfg.grid {
        return Err(Error::GridMismatch("initial field is not on the solver grid".into()));
    }
    let solver = CrankNicolson::new(cfg);
    let mut psi = psi0.values().to_vec();
    check_edges(&psi, 0)?;
    for k in 1..=cfg.steps {
        solver.step(&mut psi);
        check_edges(&psi, k)?;
    }
    WaveField::new(cfg.grid.clone(), psi)
}

/// Initial Gaussian for the exactness comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleInitial {
    Heller(HellerState),
    Hagedorn(HagedornState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactnessConfig {
    pub grid: SpatialGrid,
    pub hbar: f64,
    pub t_final: f64,
    /// Crank–Nicolson time step.
    pub dt: f64,
    /// Number of equal intervals between compared checkpoints.
    pub checkpoints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessEcho {
    pub grid: SpatialGrid,
    pub hbar: f64,
    pub t_final: f64,
    pub dt: f64,
    pub checkpoints: usize,
    pub parametrization: &'static str,
    pub ode_scheme: Scheme,
    pub ode_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub t_checkpoints: Vec<f64>,
    pub l2_errors: Vec<f64>,
    pub max_error: f64,
    pub config: ExactnessEcho,
}

/// Largest ODE step used by the parameter side of the comparison.
const ORACLE_ODE_DT: f64 = 1e-3;

/// Evolves the parameter ODEs and the grid wave function from the same
/// initial Gaussian and records their L² distance at each checkpoint.
/// Quadratic potentials use the exact flow, others RK4.
pub fn verify_exactness(initial: &OracleInitial, h: &HamiltonianSpec, cfg: &ExactnessConfig) -> Result<ExactnessReport> {
    let (mass, v) = h.require_separable()?;
    if v.n() != 1 || cfg.grid.n() != 1 {
        return Err(Error::Unsupported("the exactness oracle is one-dimensional".into()));
    }
    if cfg.checkpoints == 0 {
        return Err(Error::Invalid("at least one checkpoint interval is required".into()));
    }
    if !(cfg.t_final > 0.0 && cfg.t_final.is_finite()) {
        return Err(Error::Invalid(format!("t_final must be positive, got {}", cfg.t_final)));
    }
    let interval = cfg.t_final / cfg.checkpoints as f64;
    let cn_per = (interval / cfg.dt).round().max(1.0) as usize;
    if ((cn_per as f64) * cfg.dt - interval).abs() > 1e-9 * interval {
        return Err(Error::Invalid(format!(
            "checkpoint interval {interval} is not a multiple of dt = {}",
            cfg.dt
        )));
    }
    let ode_per = (interval / ORACLE_ODE_DT).ceil() as usize;
    let scheme = if h.as_quadratic().is_some() { Scheme::ExactQuadratic } else { Scheme::Rk4 };
    let ode_cfg = IntegrationConfig {
        dt: interval / ode_per as f64,
        t_final: cfg.t_final,
        scheme,
        hbar: cfg.hbar,
        invariant_check_every: ode_per,
        project: false,
    };
    let schrodinger = SchrodingerConfig::from_polynomial(cfg.grid.clone(), cfg.hbar, mass, v, cfg.dt, cn_per)?;

    let fields: Vec<WaveField> = match initial {
        OracleInitial::Heller(s) => integrate(s, h, &ode_cfg)?
            .checkpoints
            .iter()
            .map(|c| eval_heller(&c.state, &cfg.grid, cfg.hbar))
            .collect::<Result<_>>()?,
        OracleInitial::Hagedorn(s) => integrate(s, h, &ode_cfg)?
            .checkpoints
            .iter()
            .map(|c| {
                let theta = c.theta.expect("Hagedorn trajectories track arg det Q");
                let tracker = BranchTracker::with_theta(c.state.det_q(), theta)?;
                eval_hagedorn(&c.state, &cfg.grid, cfg.hbar, &tracker)
            })
            .collect::<Result<_>>()?,
    };
    if fields.len() != cfg.checkpoints + 1 {
        return Err(Error::Invalid("checkpoint alignment failed".into()));
    }

    let solver = CrankNicolson::new(&schrodinger);
    let mut psi = fields[0].values().to_vec();
    check_edges(&psi, 0)?;
    let mut t_checkpoints = vec![0.0];
    let mut l2_errors = vec![0.0];
    let mut step = 0;
    for (k, target) in fields.iter().enumerate().skip(1) {
        for _ in 0..cn_per {
            solver.step(&mut psi);
            step += 1;
            check_edges(&psi, step)?;
        }
        let grid_field = WaveField::new(cfg.grid.clone(), psi.clone())?;
        t_checkpoints.push(k as f64 * interval);
        l2_errors.push(l2_distance(&grid_field, target)?);
    }
    l2_errors[0] = l2_distance(&WaveField::new(cfg.grid.clone(), zero_walls(fields[0].values()))?, &fields[0])?;
    let max_error = l2_errors.iter().copied().fold(0.0, f64::max);
    Ok(ExactnessReport {
        t_checkpoints,
        l2_errors,
        max_error,
        config: ExactnessEcho {
            grid: cfg.grid.clone(),
            hbar: cfg.hbar,
            t_final: cfg.t_final,
            dt: cfg.dt,
            checkpoints: cfg.checkpoints,
            parametrization: match initial {
                OracleInitial::Heller(_) => "heller",
                OracleInitial::Hagedorn(_) => "hagedorn",
            },
            ode_scheme: scheme,
            ode_dt: ode_cfg.dt,
        },
    })
}

fn zero_walls(values: &[Complex64]) -> Vec<Complex64> {
    let mut v = values.to_vec();
    let n = v.len();
    v[0] = Complex64::new(0.0, 0.0);
    v[n - 1] = Complex64::new(0.0, 0.0);
    v
}

/// Unit directions in `R^{2n} × R^{2n×2n}`.
fn basis_directions(d: usize) -> impl Iterator<Item = (RealVector, RealMatrix)> {
    (0..d + d * d).map(move |k| {
        let mut w = RealVector::zeros(d);
        let mut big_w = RealMatrix::zeros(d, d);
        if k < d {
            w[k] = 1.0;
        } else {
            let idx = k - d;
            big_w[(idx % d, idx / d)] = 1.0;
        }
        (w, big_w)
    })
}

fn check_step(step: f64) -> Result<()> {
    if !(1e-8..=1e-4).contains(&step) {
        return Err(Error::Invalid(format!("finite-difference step must lie in [1e-8, 1e-4], got {step}")));
    }
    Ok(())
}

/// Max over basis directions `(w, W)` of
/// `|dH^ħ(w, W) − Ω^ħ((dz, dE), (w, W))|` with `dH^ħ` by central differences
/// and `Ω^ħ = ω ⊕ (ħ/2) Ω`.
pub fn fd_vector_field_check(z: &RealVector, e: &FrameMatrix, h: &HamiltonianSpec, hbar: f64, step: f64) -> Result<f64> {
    check_step(step)?;
    let e = e.matrix();
    let (dz, de) = vector_field_frame_raw(z, e, h, hbar)?;
    let j = symplectic::standard_j(h.n())?;
    let mut worst: f64 = 0.0;
    for (w, big_w) in basis_directions(z.len()) {
        let plus = lifted_hamiltonian_raw(&(z + &w * step), &(e + &big_w * step), h, hbar)?;
        let minus = lifted_hamiltonian_raw(&(z - &w * step), &(e - &big_w * step), h, hbar)?;
        let fd = (plus - minus) / (2.0 * step);
        let omega = dz.dot(&(&j * &w)) + 0.5 * hbar * (de.transpose() * &j * &big_w).trace();
        worst = worst.max((fd - omega).abs());
    }
    Ok(worst)
}

/// Pushforward of the frame field through `id × j_sp` against the reduced
/// field at `(z, j_sp(E))`, differencing `j_sp` along `dE`.
pub fn fd_relatedness_check(
    z: &RealVector,
    e: &FrameMatrix,
    h: &HamiltonianSpec,
    hbar: f64,
    step: f64,
    scheme: Difference,
) -> Result<f64> {
    check_step(step)?;
    let e = e.matrix();
    let (dz, de) = vector_field_frame_raw(z, e, h, hbar)?;
    let zeta = symplectic::j_sp_matrix(e)?;
    let ahead = symplectic::j_sp_matrix(&(e + &de * step))?;
    let pushed = match scheme {
        Difference::Forward => (ahead - &zeta) / step,
        Difference::Central => (ahead - symplectic::j_sp_matrix(&(e - &de * step))?) / (2.0 * step),
    };
    let (dz_red, dzeta) = vector_field_reduced_raw(z, &zeta, h, hbar)?;
    Ok((pushed - dzeta).amax().max((dz - dz_red).amax()))
}

/// Finite-difference stencil for tangent pushforwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// `(f(x + h) − f(x))/h`, error `O(h)`.
    Forward,
    /// `(f(x + h) − f(x − h))/2h`, error `O(h²)`.
    Central,
}

/// Norm drift `|‖ψ(T)‖ − ‖ψ(0)‖|` of a Crank–Nicolson run.
pub fn cn_norm_drift(psi0: &WaveField, cfg: &SchrodingerConfig) -> Result<f64> {
    let psi = crank_nicolson_evolve(psi0, cfg)?;
    let start = l2_norm(&WaveField::new(psi0.grid().clone(), zero_walls(psi0.values()))?);
    Ok((l2_norm(&psi) - start).abs())
}
