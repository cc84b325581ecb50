//! Seeded property suites over the geometry, dynamics and oracle layers.
//!
//! Every property produces a [`Measurement`]; suites compare it with a
//! bound that can be overridden by name.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::branch::BranchTracker;
use crate::dynamics::fields::{vector_field_reduced, vector_field_frame};
use crate::dynamics::{
    integrate, lifted_hamiltonian, reduced_hamiltonian, FrameState, HagedornState, HamiltonianSpec, HellerState,
    IntegrationConfig, Monomial, Polynomial, ReducedState, Scheme,
};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, RealMatrix, RealVector};
use crate::oracle::{
    cn_norm_drift, crank_nicolson_evolve, fd_relatedness_check, fd_vector_field_check, verify_exactness, Difference,
    ExactnessConfig, OracleInitial, SchrodingerConfig,
};
use crate::reduction::{self, ComplexStructure, SiegelPoint, SiegelTangent};
use crate::symplectic::{
    self, random_gl_with, random_orthogonal_with, random_sp_element, random_symplectic_with, seeded_rng, FrameMatrix,
    LieAlgebraElement,
};
use crate::wavepacket::{compare_parametrizations, eval_hagedorn, eval_heller, l2_distance, l2_norm, SpatialGrid, WaveField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Reduction,
    Dynamics,
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "reduction" => Ok(Suite::Reduction),
            "dynamics" => Ok(Suite::Dynamics),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(Error::Invalid(format!(
                "unknown suite '{other}' (expected core, reduction, dynamics, oracle or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Core => "core",
            Suite::Reduction => "reduction",
            Suite::Dynamics => "dynamics",
            Suite::Oracle => "oracle",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub samples: usize,
    pub value: f64,
}

impl Measurement {
    fn new(samples: usize, value: f64) -> Self {
        Measurement { samples, value }
    }
}

/// Running maximum that propagates NaN as a failure.
#[derive(Default)]
struct MaxTracker {
    samples: usize,
    value: f64,
}

impl MaxTracker {
    fn push(&mut self, x: f64) {
        self.samples += 1;
        if x.is_nan() || x > self.value {
            self.value = if self.value.is_nan() { self.value } else { x };
        }
    }

    fn done(self) -> Measurement {
        Measurement::new(self.samples, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `value ≤ tol`.
    AtMost,
    /// Passes when `value ≥ tol`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub name: String,
    pub samples: usize,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
    pub pass: bool,
}

impl PropertyRow {
    pub fn bound_symbol(&self) -> &'static str {
        match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        }
    }
}

pub fn check(value: f64, bound: Bound, tol: f64) -> bool {
    match bound {
        Bound::AtMost => value <= tol,
        Bound::AtLeast => value >= tol,
    }
}

fn j(n: usize) -> RealMatrix {
    symplectic::standard_j(n).expect("n ≥ 1")
}

fn v(x: &[f64]) -> RealVector {
    RealVector::from_row_slice(x)
}

fn well_conditioned_gl<R: Rng>(n: usize, rng: &mut R) -> FrameMatrix {
    loop {
        let e = random_gl_with(n, rng);
        if linalg::condition_number(e.matrix()) < 100.0 {
            return e;
        }
    }
}

fn random_z<R: Rng>(n: usize, rng: &mut R) -> RealVector {
    RealVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0))
}

/// Two-dimensional potential with cubic and quartic couplings.
pub fn anharmonic_2d() -> HamiltonianSpec {
    let terms = vec![
        Monomial { coeff: 0.5, powers: vec![2, 0] },
        Monomial { coeff: 0.8, powers: vec![0, 2] },
        Monomial { coeff: 0.1, powers: vec![3, 0] },
        Monomial { coeff: 0.05, powers: vec![4, 0] },
        Monomial { coeff: 0.2, powers: vec![1, 2] },
    ];
    HamiltonianSpec::separable(1.2, Polynomial::new(2, terms).expect("valid table")).expect("positive mass")
}

/// Anisotropic two-dimensional harmonic potential with a linear force.
pub fn quadratic_2d() -> HamiltonianSpec {
    let terms = vec![
        Monomial { coeff: 0.5, powers: vec![2, 0] },
        Monomial { coeff: 1.1, powers: vec![0, 2] },
        Monomial { coeff: 0.3, powers: vec![1, 1] },
        Monomial { coeff: -0.2, powers: vec![1, 0] },
    ];
    HamiltonianSpec::separable(0.9, Polynomial::new(2, terms).expect("valid table")).expect("positive mass")
}

pub fn harmonic_1d() -> HamiltonianSpec {
    HamiltonianSpec::harmonic(1, 1.0, 1.0).expect("valid")
}

pub fn free_1d() -> HamiltonianSpec {
    HamiltonianSpec::free(1, 1.0).expect("valid")
}

fn exact_config(dt: f64, t_final: f64, every: usize) -> IntegrationConfig {
    IntegrationConfig {
        dt,
        t_final,
        scheme: Scheme::ExactQuadratic,
        hbar: 1.0,
        invariant_check_every: every,
        project: false,
    }
}

// ---------------------------------------------------------------- core

/// `‖j_sp(SE) − S j_sp(E) S⁻¹‖` for random `E ∈ GL`, `S ∈ Sp`.
pub fn j_sp_equivariance(seed: u64, samples: usize, dims: &[usize]) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for &n in dims {
        for _ in 0..samples {
            let e = random_gl_with(n, &mut rng);
            let s = random_symplectic_with(n, &mut rng);
            let s_inv = symplectic::symplectic_inverse(s.matrix())?;
            let lhs = symplectic::j_sp_matrix(&(s.matrix() * e.matrix()))?;
            let rhs = s.matrix() * symplectic::j_sp_matrix(e.matrix())? * s_inv;
            acc.push((lhs - rhs).norm());
        }
    }
    Ok(acc.done())
}

/// `‖j_o(EO) − Oᵀ j_o(E) O‖` for random `E ∈ GL`, `O ∈ O(2n)`.
pub fn j_o_equivariance(seed: u64, samples: usize, dims: &[usize]) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for &n in dims {
        for _ in 0..samples {
            let e = random_gl_with(n, &mut rng);
            let o = random_orthogonal_with(n, &mut rng);
            let lhs = symplectic::j_o_matrix(&(e.matrix() * o.matrix()))?;
            let rhs = o.matrix().transpose() * symplectic::j_o_matrix(e.matrix())? * o.matrix();
            acc.push((lhs - rhs).norm());
        }
    }
    Ok(acc.done())
}

/// Membership residuals of the random group samplers and momentum maps.
pub fn membership(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for n in 1..=3 {
        for _ in 0..samples {
            let s = random_symplectic_with(n, &mut rng);
            let o = random_orthogonal_with(n, &mut rng);
            let e = random_gl_with(n, &mut rng);
            acc.push(symplectic::symplectic_residual(s.matrix())?);
            acc.push(symplectic::orthogonal_residual(o.matrix())?);
            acc.push(symplectic::sp_algebra_residual(symplectic::j_sp(&e).matrix())?);
            acc.push(symplectic::o_algebra_residual(symplectic::j_o(&e).matrix())?);
        }
    }
    Ok(acc.done())
}

/// `g(E) = J j_sp(E)` on symplectic frames and `g(EO) = g(E)`.
pub fn metric_identities(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for n in 1..=3 {
        for _ in 0..samples {
            let s = random_symplectic_with(n, &mut rng);
            let o = random_orthogonal_with(n, &mut rng);
            let g = symplectic::metric_from_frame(&s)?;
            let zeta = symplectic::j_sp_matrix(s.matrix())?;
            acc.push((&g - j(n) * zeta).norm());
            let rotated = FrameMatrix::new(s.matrix() * o.matrix())?;
            acc.push((symplectic::metric_from_frame(&rotated)? - g).norm());
        }
    }
    Ok(acc.done())
}

/// Pairs `E, E' = SE` share `j_o`; `E'E⁻¹` must be symplectic.
pub fn dual_pair_symplectic(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = 1 + k % 3;
        let e = well_conditioned_gl(n, &mut rng);
        let s = random_symplectic_with(n, &mut rng);
        let e2 = s.matrix() * e.matrix();
        let level = (symplectic::j_o_matrix(&e2)? - symplectic::j_o_matrix(e.matrix())?).norm();
        let recovered = &e2 * linalg::inverse(e.matrix(), "E")?;
        acc.push(symplectic::symplectic_residual(&recovered)?.max(level));
    }
    Ok(acc.done())
}

/// Pairs `E, E' = EO` share `j_sp`; `E⁻¹E'` must be orthogonal.
pub fn dual_pair_orthogonal(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = 1 + k % 3;
        let e = well_conditioned_gl(n, &mut rng);
        let o = random_orthogonal_with(n, &mut rng);
        let e2 = e.matrix() * o.matrix();
        let level = (symplectic::j_sp_matrix(&e2)? - symplectic::j_sp_matrix(e.matrix())?).norm();
        let recovered = linalg::inverse(e.matrix(), "E")? * &e2;
        acc.push(symplectic::orthogonal_residual(&recovered)?.max(level));
    }
    Ok(acc.done())
}

// ----------------------------------------------------------- reduction

/// `siegel(S'S) = mobius(S', siegel(S))`.
pub fn projection_equivariance(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = 1 + k % 3;
        let s = random_symplectic_with(n, &mut rng);
        let s2 = random_symplectic_with(n, &mut rng);
        let lhs = reduction::siegel_from_symplectic_frame(&FrameMatrix::new(s2.matrix() * s.matrix())?)?;
        let rhs = reduction::mobius(&s2, &reduction::siegel_from_symplectic_frame(&s)?)?;
        acc.push((lhs.matrix() - rhs.matrix()).norm());
    }
    Ok(acc.done())
}

/// `‖siegel(I) − iI‖`, required to vanish exactly.
pub fn identity_maps_to_i(max_n: usize) -> Result<Measurement> {
    let mut acc = MaxTracker::default();
    for n in 1..=max_n {
        let w = reduction::siegel_from_symplectic_frame(&FrameMatrix::identity(n)?)?;
        acc.push((w.matrix() - SiegelPoint::i_identity(n)?.matrix()).norm());
    }
    Ok(acc.done())
}

/// Symmetry defect of `mobius(S, W)`, or `+∞` if `Im` leaves the cone.
pub fn mobius_preserves_siegel(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = 1 + k % 3;
        let w = reduction::siegel_from_symplectic_frame(&random_symplectic_with(n, &mut rng))?;
        let s = random_symplectic_with(n, &mut rng);
        let image = reduction::mobius_matrix(s.matrix(), w.matrix())?;
        let min_b = linalg::min_symmetric_eigenvalue(&linalg::symmetrize(&linalg::imag_part(&image)));
        let defect = linalg::complex_symmetry_residual(&image);
        acc.push(if min_b > 0.0 { defect } else { f64::INFINITY });
    }
    Ok(acc.done())
}

/// `ζ ↦ W ↦ ζ` round trip, and `ζ(W) = j_sp(section(W))`.
pub fn complex_structure_round_trip(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = 1 + k % 3;
        let s = random_symplectic_with(n, &mut rng);
        let zeta = reduction::complex_structure_from_frame(&s)?;
        let w = reduction::siegel_from_complex_structure(&zeta)?;
        let back = reduction::complex_structure_from_siegel(&w)?;
        acc.push((back.matrix() - zeta.matrix()).norm());
        let direct = reduction::siegel_from_symplectic_frame(&s)?;
        acc.push((direct.matrix() - w.matrix()).norm());
    }
    Ok(acc.done())
}

/// `|KKS_{−J}(ξ, ζ) − ½ Ω_Σ(iI)(dW_ξ, dW_ζ)|` for random `ξ, ζ ∈ sp`.
pub fn form_proportionality(seed: u64, samples: usize, dims: &[usize]) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..samples {
        let n = dims[k % dims.len()];
        let eta = ComplexStructure::standard(n)?;
        let w = SiegelPoint::i_identity(n)?;
        let xi = LieAlgebraElement::sp(random_sp_element(n, &mut rng))?;
        let ze = LieAlgebraElement::sp(random_sp_element(n, &mut rng))?;
        let kks = reduction::kks_form(&eta, &xi, &ze)?;
        let t1 = reduction::orbit_tangent_coords(&xi)?;
        let t2 = reduction::orbit_tangent_coords(&ze)?;
        let siegel = reduction::siegel_form_at(&w, &t1, &t2)?;
        acc.push((kks - 0.5 * siegel).abs());
    }
    Ok(acc.done())
}

/// The same proportionality at random orbit points `η = Ad_S(−J)`, with
/// Siegel tangents from finite differences of the Möbius action.
///
/// Forward differences at `1e-6` leave an `O(h)` truncation error near
/// `1e-5` at strongly squeezed points, so the central stencil is the
/// default (`1e-5` step, error `O(h²)`).
pub fn form_proportionality_pushforward(seed: u64, points: usize, scheme: Difference) -> Result<Measurement> {
    let step = match scheme {
        Difference::Forward => 1e-6,
        Difference::Central => 1e-5,
    };
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for k in 0..points {
        let n = 1 + k % 2;
        let s = random_symplectic_with(n, &mut rng);
        let eta = reduction::complex_structure_from_frame(&s)?;
        let w = reduction::siegel_from_symplectic_frame(&s)?;
        let tangent = |xi: &RealMatrix| -> Result<SiegelTangent> {
            let ahead = reduction::mobius_matrix(&linalg::expm(&(xi * step)), w.matrix())?;
            let dw: ComplexMatrix = match scheme {
                Difference::Forward => (ahead - w.matrix()) / Complex64::new(step, 0.0),
                Difference::Central => {
                    let behind = reduction::mobius_matrix(&linalg::expm(&(xi * -step)), w.matrix())?;
                    (ahead - behind) / Complex64::new(2.0 * step, 0.0)
                }
            };
            let dw = (&dw + dw.transpose()) * Complex64::new(0.5, 0.0);
            SiegelTangent::from_complex(&dw)
        };
        let xi = random_sp_element(n, &mut rng);
        let ze = random_sp_element(n, &mut rng);
        let kks = reduction::kks_form(&eta, &LieAlgebraElement::sp(xi.clone())?, &LieAlgebraElement::sp(ze.clone())?)?;
        let siegel = reduction::siegel_form_at(&w, &tangent(&xi)?, &tangent(&ze)?)?;
        acc.push((kks - 0.5 * siegel).abs());
    }
    Ok(acc.done())
}

// ------------------------------------------------------------ dynamics

/// `H^ħ(z, EO) = H^ħ(z, E)` and `H^ħ(z, E) = Ȟ^ħ(z, j_sp(E))`, relative.
pub fn lifted_hamiltonian_identities(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let h = anharmonic_2d();
    let mut acc = MaxTracker::default();
    for _ in 0..samples {
        let e = random_symplectic_with(2, &mut rng);
        let o = random_orthogonal_with(2, &mut rng);
        let z = random_z(2, &mut rng);
        let base = lifted_hamiltonian(&z, &e, &h, 0.7)?;
        let rotated = lifted_hamiltonian(&z, &FrameMatrix::new(e.matrix() * o.matrix())?, &h, 0.7)?;
        let zeta = reduction::complex_structure_from_frame(&e)?;
        let reduced = reduced_hamiltonian(&z, &zeta, &h, 0.7)?;
        let scale = 1.0 + base.abs();
        acc.push((rotated - base).abs().max((reduced - base).abs()) / scale);
    }
    Ok(acc.done())
}

/// Central-difference check of `dH^ħ = Ω^ħ(X, ·)` over basis directions.
pub fn vector_field_fd(seed: u64, samples: usize, h: &HamiltonianSpec, step: f64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let n = h.n();
    let mut acc = MaxTracker::default();
    for _ in 0..samples {
        let e = random_symplectic_with(n, &mut rng);
        let z = random_z(n, &mut rng);
        acc.push(fd_vector_field_check(&z, &e, h, 0.8, step)?);
    }
    Ok(acc.done())
}

/// Residual ratio under step halving for the central-difference check
/// (≈ 4 for second order).
pub fn vector_field_fd_order(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let h = anharmonic_2d();
    let e = random_symplectic_with(2, &mut rng);
    let z = random_z(2, &mut rng);
    let coarse = fd_vector_field_check(&z, &e, &h, 0.8, 1e-4)?;
    let fine = fd_vector_field_check(&z, &e, &h, 0.8, 5e-5)?;
    Ok(Measurement::new(2, coarse / fine))
}

/// Finite-difference pushforward of the frame field through `j_sp`
/// against the reduced field. Forward differences use step `1e-7`, central
/// ones `1e-5`.
pub fn vector_field_relatedness(seed: u64, samples: usize, scheme: Difference) -> Result<Measurement> {
    let step = match scheme {
        Difference::Forward => 1e-7,
        Difference::Central => 1e-5,
    };
    let mut rng = seeded_rng(seed);
    let h = anharmonic_2d();
    let mut acc = MaxTracker::default();
    for _ in 0..samples {
        let e = random_symplectic_with(2, &mut rng);
        let z = random_z(2, &mut rng);
        acc.push(fd_relatedness_check(&z, &e, &h, 0.8, step, scheme)?);
    }
    Ok(acc.done())
}

/// Hagedorn `(Q, P)` derivative against the frame field `dE` for a
/// quadratic potential.
pub fn hagedorn_frame_agreement(seed: u64, samples: usize) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let h = quadratic_2d();
    let mut acc = MaxTracker::default();
    for _ in 0..samples {
        let e = random_symplectic_with(2, &mut rng);
        let z = random_z(2, &mut rng);
        let s = HagedornState::from_frame(&z, &e, 0.0)?;
        let d = crate::dynamics::hagedorn_rhs(&s, &h)?;
        let (_, de) = vector_field_frame(&z, &e, &h, 1.0)?;
        let ds = HagedornState { q: d.dq, p: d.dp, big_q: d.dbig_q, big_p: d.dbig_p, s: 0.0 };
        acc.push((ds.frame_matrix() - de).norm());
    }
    Ok(acc.done())
}

/// `max_t ‖j_o(E(t)) + J‖` under the exact flow, 10⁴ steps of 10⁻³, for
/// the harmonic oscillator and the free particle from a random symplectic
/// frame and from the coherent frame.
pub fn noether_exact(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let cfg = exact_config(1e-3, 10.0, 1);
    let mut acc = MaxTracker::default();
    for h in [harmonic_1d(), free_1d()] {
        let starts = [
            FrameState::new(v(&[1.0, 0.5]), FrameMatrix::identity(1)?)?,
            FrameState::new(v(&[-0.3, 1.0]), random_symplectic_with(1, &mut rng))?,
        ];
        for s0 in starts {
            let traj = integrate(&s0, &h, &cfg)?;
            for c in &traj.checkpoints {
                acc.push((symplectic::j_o_matrix(&c.state.e)? + j(1)).norm());
            }
        }
    }
    Ok(acc.done())
}

/// Ratio of RK4 Noether drift at `dt` and `dt/2` (expected ≈ 16).
pub fn noether_rk4_halving(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let s0 = FrameState::new(v(&[1.0, 0.0]), random_symplectic_with(1, &mut rng))?;
    let h = harmonic_1d();
    let drift = |dt: f64| -> Result<f64> {
        let cfg = IntegrationConfig { scheme: Scheme::Rk4, ..exact_config(dt, 10.0, 1_000_000) };
        Ok(integrate(&s0, &h, &cfg)?.last().diagnostics.noether_drift)
    };
    Ok(Measurement::new(2, drift(0.1)? / drift(0.05)?))
}

/// `max_t |H^ħ(t) − H^ħ(0)|` under the exact flow.
pub fn energy_exact(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let s0 = FrameState::new(v(&[1.0, 0.5]), random_symplectic_with(1, &mut rng))?;
    let traj = integrate(&s0, &harmonic_1d(), &exact_config(1e-3, 10.0, 10))?;
    let h2 = quadratic_2d();
    let s2 = FrameState::new(random_z(2, &mut rng), random_symplectic_with(2, &mut rng))?;
    let traj2 = integrate(&s2, &h2, &exact_config(1e-3, 10.0, 10))?;
    Ok(Measurement::new(
        traj.checkpoints.len() + traj2.checkpoints.len(),
        traj.max_energy_drift().max(traj2.max_energy_drift()),
    ))
}

/// Hagedorn constraint residual after 10⁴ RK4 steps in an anharmonic
/// potential.
pub fn hagedorn_constraints_rk4(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let h = anharmonic_2d();
    let s0 = HagedornState::from_frame(&random_z(2, &mut rng), &random_symplectic_with(2, &mut rng), 0.0)?;
    let cfg = IntegrationConfig { scheme: Scheme::Rk4, ..exact_config(1e-3, 10.0, 100) };
    let traj = integrate(&s0, &h, &cfg)?;
    Ok(Measurement::new(traj.checkpoints.len(), traj.max_constraint_residual()))
}

/// Residuals of the Hagedorn/Heller correspondence along matched
/// trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceResiduals {
    pub checkpoints: usize,
    /// `max_t ‖P Q⁻¹ − (A + iB)‖`.
    pub w: f64,
    /// `max_t |φ − S + (ħ/2)θ|`.
    pub phase: f64,
    /// `max_t |S − φ + (ħ/2)θ|` with `φ₀ = S₀ + (ħ/2)θ₀`.
    pub phase_opposite_sign: f64,
    /// Largest `|θ(t)|` seen.
    pub max_theta: f64,
}

fn equivalence_run(h: &HamiltonianSpec, s0: &HagedornState, hbar: f64, t_final: f64) -> Result<EquivalenceResiduals> {
    let theta0 = s0.det_q().arg();
    let cfg = IntegrationConfig { hbar, ..exact_config(1e-3, t_final, 10) };
    let heller0 = HellerState::from_hagedorn(s0, hbar, theta0)?;
    let literal0 = HellerState { phi: s0.s + 0.5 * hbar * theta0, ..heller0.clone() };
    let hag = integrate(s0, h, &cfg)?;
    let hel = integrate(&heller0, h, &cfg)?;
    let lit = integrate(&literal0, h, &cfg)?;
    let mut out = EquivalenceResiduals {
        checkpoints: hag.checkpoints.len(),
        w: 0.0,
        phase: 0.0,
        phase_opposite_sign: 0.0,
        max_theta: 0.0,
    };
    for ((a, b), c) in hag.checkpoints.iter().zip(&hel.checkpoints).zip(&lit.checkpoints) {
        let theta = a.theta.expect("Hagedorn trajectories track the branch");
        out.w = out.w.max((a.state.w_matrix()? - b.state.w_matrix()).norm());
        out.phase = out.phase.max((b.state.phi - a.state.s + 0.5 * hbar * theta).abs());
        out.phase_opposite_sign = out.phase_opposite_sign.max((a.state.s - c.state.phi + 0.5 * hbar * theta).abs());
        out.max_theta = out.max_theta.max(theta.abs());
    }
    Ok(out)
}

/// Matched Hagedorn and Heller trajectories over `[0, 10]` for the
/// harmonic oscillator, the free particle and a two-dimensional quadratic
/// potential, from random symplectic initial frames.
pub fn hagedorn_heller_equivalence(seed: u64) -> Result<EquivalenceResiduals> {
    let mut rng = seeded_rng(seed);
    let mut total = EquivalenceResiduals { checkpoints: 0, w: 0.0, phase: 0.0, phase_opposite_sign: 0.0, max_theta: 0.0 };
    let cases = [(harmonic_1d(), 1usize, 1.0), (free_1d(), 1, 0.5), (quadratic_2d(), 2, 1.0)];
    for (h, n, hbar) in cases {
        let s0 = HagedornState::from_frame(&random_z(n, &mut rng), &random_symplectic_with(n, &mut rng), 0.3)?;
        let r = equivalence_run(&h, &s0, hbar, 10.0)?;
        total.checkpoints += r.checkpoints;
        total.w = total.w.max(r.w);
        total.phase = total.phase.max(r.phase);
        total.phase_opposite_sign = total.phase_opposite_sign.max(r.phase_opposite_sign);
        total.max_theta = total.max_theta.max(r.max_theta);
    }
    Ok(total)
}

/// `max_t ‖j_sp(E(t)) − ζ(t)‖` with `E` from the frame flow and `ζ` from the
/// reduced flow, both over `[0, 10]`.
pub fn reduced_relatedness_trajectory(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    let runs = [
        (quadratic_2d(), exact_config(1e-3, 10.0, 10)),
        (anharmonic_2d(), IntegrationConfig { scheme: Scheme::Rk4, ..exact_config(1e-3, 10.0, 10) }),
    ];
    for (h, cfg) in runs {
        let f0 = FrameState::new(random_z(2, &mut rng), random_symplectic_with(2, &mut rng))?;
        let r0 = ReducedState::from_frame_state(&f0)?;
        let frame = integrate(&f0, &h, &cfg)?;
        let reduced = integrate(&r0, &h, &cfg)?;
        for (a, b) in frame.checkpoints.iter().zip(&reduced.checkpoints) {
            let zeta = symplectic::j_sp_matrix(&a.state.e)?;
            acc.push((zeta - &b.state.zeta).norm().max((&a.state.z - &b.state.z).norm()));
        }
    }
    Ok(acc.done())
}

/// Harmonic oscillator from `W₀ = iI`: `max_t ‖W(t) − iI‖` along the
/// reduced and Heller flows, plus `‖dζ‖` at `ζ = −J`.
pub fn coherent_fixed_point(seed: u64) -> Result<Measurement> {
    let mut rng = seeded_rng(seed);
    let mut acc = MaxTracker::default();
    for n in 1..=2 {
        let h = HamiltonianSpec::harmonic(n, 1.0, 1.0)?;
        let z0 = random_z(n, &mut rng);
        let i_n = SiegelPoint::i_identity(n)?;
        let (_, dzeta) = vector_field_reduced(&z0, &ComplexStructure::standard(n)?, &h, 1.0)?;
        acc.push(dzeta.norm());
        let cfg = exact_config(1e-3, 10.0, 10);
        let r0 = ReducedState::new(z0.clone(), ComplexStructure::standard(n)?)?;
        for c in integrate(&r0, &h, &cfg)?.checkpoints {
            let w = reduction::siegel_from_complex_structure(&c.state.complex_structure()?)?;
            acc.push((w.matrix() - i_n.matrix()).norm());
        }
        let h0 = HellerState::coherent(z0.rows(0, n).into_owned(), z0.rows(n, n).into_owned())?;
        for c in integrate(&h0, &h, &cfg)?.checkpoints {
            acc.push((c.state.w_matrix() - i_n.matrix()).norm());
        }
    }
    Ok(acc.done())
}

/// One harmonic period from the coherent state at `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaslovResiduals {
    pub theta: f64,
    /// `|θ(T) − 2π|`.
    pub theta_error: f64,
    /// `|prefactor(T)/prefactor(0) + 1|`.
    pub prefactor_error: f64,
    /// `max_x ||ψ(T)| − |ψ(0)||`.
    pub modulus_error: f64,
    /// `‖ψ(T) + ψ(0)‖₂`.
    pub sign_error: f64,
}

pub fn maslov_sign() -> Result<MaslovResiduals> {
    let h = harmonic_1d();
    let s0 = HagedornState::coherent(v(&[1.0]), v(&[0.0]))?;
    let traj = integrate(&s0, &h, &exact_config(TAU / 1000.0, TAU, 1000))?;
    let end = traj.last();
    let theta = end.theta.expect("tracked");
    let grid = SpatialGrid::uniform_1d(-10.0, 10.0, 2001)?;
    let b0 = BranchTracker::new(s0.det_q())?;
    let b1 = BranchTracker::with_theta(end.state.det_q(), theta)?;
    let pre0 = b0.inv_sqrt_det(s0.det_q())?;
    let pre1 = b1.inv_sqrt_det(end.state.det_q())?;
    let psi0 = eval_hagedorn(&s0, &grid, 1.0, &b0)?;
    let psi1 = eval_hagedorn(&end.state, &grid, 1.0, &b1)?;
    let modulus_error = psi0
        .values()
        .iter()
        .zip(psi1.values())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max);
    let negated = WaveField::new(grid.clone(), psi0.values().iter().map(|z| -z).collect())?;
    Ok(MaslovResiduals {
        theta,
        theta_error: (theta - TAU).abs(),
        prefactor_error: (pre1 / pre0 + 1.0).norm(),
        modulus_error,
        sign_error: l2_distance(&psi1, &negated)?,
    })
}

/// Along exact harmonic and free trajectories: `|‖ψ‖ − 1|` for both
/// parametrizations (first value) and their L² distance (second value).
pub fn wavepacket_consistency() -> Result<(Measurement, Measurement)> {
    let mut norm = MaxTracker::default();
    let mut dist = MaxTracker::default();
    let cases = [
        (harmonic_1d(), HagedornState::coherent(v(&[1.0]), v(&[0.5]))?, 10.0),
        (free_1d(), HagedornState::coherent(v(&[0.0]), v(&[0.5]))?, 60.0),
    ];
    for (h, s0, width) in cases {
        let grid = SpatialGrid::uniform_1d(-width, width, (100.0 * width) as usize + 1)?;
        let heller0 = HellerState::from_hagedorn(&s0, 1.0, s0.det_q().arg())?;
        let cfg = exact_config(1e-2, 10.0, 100);
        let hag = integrate(&s0, &h, &cfg)?;
        let hel = integrate(&heller0, &h, &cfg)?;
        for (a, b) in hag.checkpoints.iter().zip(&hel.checkpoints) {
            let tracker = BranchTracker::with_theta(a.state.det_q(), a.theta.expect("tracked"))?;
            let fa = eval_hagedorn(&a.state, &grid, 1.0, &tracker)?;
            let fb = eval_heller(&b.state, &grid, 1.0)?;
            norm.push((l2_norm(&fa) - 1.0).abs().max((l2_norm(&fb) - 1.0).abs()));
            dist.push(compare_parametrizations(&b.state, &a.state, &grid, 1.0, &tracker)?);
        }
    }
    Ok((norm.done(), dist.done()))
}

// -------------------------------------------------------------- oracle

/// Norm drift of 10³ Crank–Nicolson steps for a moving Gaussian in a
/// harmonic well.
pub fn cn_unitarity() -> Result<Measurement> {
    let grid = SpatialGrid::uniform_1d(-15.0, 15.0, 1501)?;
    let s = HellerState::coherent(v(&[1.0]), v(&[0.5]))?;
    let psi0 = eval_heller(&s, &grid, 1.0)?;
    let pot = Polynomial::isotropic_quadratic(1, 1.0)?;
    let cfg = SchrodingerConfig::from_polynomial(grid, 1.0, 1.0, &pot, 1e-3, 1000)?;
    Ok(Measurement::new(1000, cn_norm_drift(&psi0, &cfg)?))
}

/// L² distance between the evolved harmonic ground state and
/// `e^{-it/2} ψ₀` at `t = 1`.
pub fn cn_ground_state() -> Result<Measurement> {
    let grid = SpatialGrid::uniform_1d(-10.0, 10.0, 2001)?;
    let psi0 = eval_heller(&HellerState::coherent(v(&[0.0]), v(&[0.0]))?, &grid, 1.0)?;
    let pot = Polynomial::isotropic_quadratic(1, 1.0)?;
    let cfg = SchrodingerConfig::from_polynomial(grid.clone(), 1.0, 1.0, &pot, 1e-4, 10_000)?;
    let psi = crank_nicolson_evolve(&psi0, &cfg)?;
    let rot = Complex64::from_polar(1.0, -0.5);
    let exact = WaveField::new(grid, psi0.values().iter().map(|z| z * rot).collect())?;
    Ok(Measurement::new(1, l2_distance(&psi, &exact)?))
}

/// Oracle comparison on `[−w, w]` with spacing `dx` and CN step `dt`
/// until `t = 2`.
pub fn exactness_error(initial: &OracleInitial, h: &HamiltonianSpec, half_width: f64, dx: f64, dt: f64) -> Result<f64> {
    let count = (2.0 * half_width / dx).round() as usize + 1;
    let cfg = ExactnessConfig {
        grid: SpatialGrid::uniform_1d(-half_width, half_width, count)?,
        hbar: 1.0,
        t_final: 2.0,
        dt,
        checkpoints: 20,
    };
    Ok(verify_exactness(initial, h, &cfg)?.max_error)
}

pub fn oracle_harmonic_initial() -> Result<OracleInitial> {
    Ok(OracleInitial::Heller(HellerState::coherent(v(&[1.0]), v(&[0.0]))?))
}

pub fn oracle_free_initial() -> Result<OracleInitial> {
    Ok(OracleInitial::Hagedorn(HagedornState::coherent(v(&[0.0]), v(&[0.5]))?))
}

pub fn quartic_1d() -> HamiltonianSpec {
    HamiltonianSpec::separable(1.0, Polynomial::univariate(&[0.0, 0.0, 0.0, 0.0, 0.25]).expect("valid")).expect("valid")
}

// --------------------------------------------------------------- suites

type Runner = fn(u64, usize) -> Result<Measurement>;

struct Property {
    name: &'static str,
    suite: Suite,
    bound: Bound,
    tol: f64,
    run: Runner,
}

fn properties() -> Vec<Property> {
    use Bound::{AtLeast, AtMost};
    use Suite::{Core, Dynamics, Oracle, Reduction};
    let p = |name, suite, bound, tol, run: Runner| Property { name, suite, bound, tol, run };
    vec![
        p("j_sp_equivariance", Core, AtMost, 1e-9, |s, k| j_sp_equivariance(s, k, &[1, 2, 4])),
        p("j_o_equivariance", Core, AtMost, 1e-9, |s, k| j_o_equivariance(s, k, &[1, 2, 4])),
        p("group_and_algebra_membership", Core, AtMost, 1e-10, membership),
        p("metric_identities", Core, AtMost, 1e-9, metric_identities),
        p("dual_pair_symplectic_recovery", Core, AtMost, 1e-8, dual_pair_symplectic),
        p("dual_pair_orthogonal_recovery", Core, AtMost, 1e-8, dual_pair_orthogonal),
        p("projection_mobius_equivariance", Reduction, AtMost, 1e-9, projection_equivariance),
        p("identity_frame_maps_to_iI", Reduction, AtMost, 0.0, |_, _| identity_maps_to_i(4)),
        p("mobius_preserves_siegel_space", Reduction, AtMost, 1e-10, |s, k| mobius_preserves_siegel(s, 5 * k)),
        p("complex_structure_round_trip", Reduction, AtMost, 1e-9, complex_structure_round_trip),
        p("kks_half_siegel_at_iI", Reduction, AtMost, 1e-10, |s, k| form_proportionality(s, k, &[1, 2, 3])),
        p("kks_half_siegel_pushforward", Reduction, AtMost, 1e-5, |s, _| {
            form_proportionality_pushforward(s, 20, Difference::Central)
        }),
        p("lifted_hamiltonian_identities", Dynamics, AtMost, 1e-10, lifted_hamiltonian_identities),
        p("vector_field_fd_quadratic", Dynamics, AtMost, 1e-7, |s, k| vector_field_fd(s, k.min(50), &quadratic_2d(), 1e-6)),
        p("vector_field_fd_anharmonic", Dynamics, AtMost, 1e-6, |s, k| vector_field_fd(s, k.min(50), &anharmonic_2d(), 1e-6)),
        p("vector_field_relatedness", Dynamics, AtMost, 1e-6, |s, k| {
            vector_field_relatedness(s, k.min(100), Difference::Central)
        }),
        p("hagedorn_frame_agreement", Dynamics, AtMost, 1e-13, hagedorn_frame_agreement),
        p("noether_exact_quadratic", Dynamics, AtMost, 1e-11, |s, _| noether_exact(s)),
        p("noether_rk4_halving_ratio", Dynamics, AtLeast, 15.0, |s, _| noether_rk4_halving(s)),
        p("energy_exact_quadratic", Dynamics, AtMost, 1e-10, |s, _| energy_exact(s)),
        p("hagedorn_constraints_rk4", Dynamics, AtMost, 1e-9, |s, _| hagedorn_constraints_rk4(s)),
        p("hagedorn_heller_w", Dynamics, AtMost, 1e-8, |s, _| {
            hagedorn_heller_equivalence(s).map(|r| Measurement::new(r.checkpoints, r.w))
        }),
        p("hagedorn_heller_phase", Dynamics, AtMost, 1e-8, |s, _| {
            hagedorn_heller_equivalence(s).map(|r| Measurement::new(r.checkpoints, r.phase))
        }),
        p("reduced_relatedness_trajectory", Dynamics, AtMost, 1e-7, |s, _| reduced_relatedness_trajectory(s)),
        p("coherent_fixed_point", Dynamics, AtMost, 1e-10, |s, _| coherent_fixed_point(s)),
        p("maslov_theta", Dynamics, AtMost, 1e-8, |_, _| maslov_sign().map(|r| Measurement::new(1, r.theta_error))),
        p("maslov_sign_flip", Dynamics, AtMost, 1e-8, |_, _| {
            maslov_sign().map(|r| Measurement::new(1, r.prefactor_error.max(r.modulus_error)))
        }),
        p("wavepacket_norm", Dynamics, AtMost, 1e-8, |_, _| wavepacket_consistency().map(|r| r.0)),
        p("parametrization_equivalence", Dynamics, AtMost, 1e-7, |_, _| wavepacket_consistency().map(|r| r.1)),
        p("cn_unitarity", Oracle, AtMost, 1e-10, |_, _| cn_unitarity()),
        p("cn_ground_state_phase", Oracle, AtMost, 1e-4, |_, _| cn_ground_state()),
        p("exactness_harmonic", Oracle, AtMost, 5e-4, |_, _| {
            exactness_error(&oracle_harmonic_initial()?, &harmonic_1d(), 10.0, 0.01, 1e-4).map(|e| Measurement::new(21, e))
        }),
        p("exactness_free", Oracle, AtMost, 5e-4, |_, _| {
            exactness_error(&oracle_free_initial()?, &free_1d(), 20.0, 0.01, 1e-4).map(|e| Measurement::new(21, e))
        }),
        p("exactness_quartic_control", Oracle, AtLeast, 1e-2, |_, _| {
            exactness_error(&oracle_harmonic_initial()?, &quartic_1d(), 10.0, 0.02, 2e-4).map(|e| Measurement::new(21, e))
        }),
        p("fd_check_step_halving_ratio", Oracle, AtLeast, 3.0, |s, _| vector_field_fd_order(s)),
    ]
}

/// Names of every property, usable as tolerance-override keys.
pub fn property_names() -> Vec<&'static str> {
    properties().into_iter().map(|p| p.name).collect()
}

/// Runs the named suite. `overrides` replaces bounds by property name;
/// unknown names are rejected.
pub fn run_suite(suite: Suite, seed: u64, samples: usize, overrides: &BTreeMap<String, f64>) -> Result<Vec<PropertyRow>> {
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    let props = properties();
    for key in overrides.keys() {
        if !props.iter().any(|p| p.name == key) {
            return Err(Error::Invalid(format!("unknown tolerance key '{key}'")));
        }
    }
    let mut rows = Vec::new();
    for p in props.into_iter().filter(|p| suite == Suite::All || p.suite == suite) {
        let tol = overrides.get(p.name).copied().unwrap_or(p.tol);
        let m = (p.run)(seed, samples)?;
        rows.push(PropertyRow {
            name: p.name.to_string(),
            samples: m.samples,
            value: m.value,
            bound: p.bound,
            tol,
            pass: check(m.value, p.bound, tol),
        });
    }
    Ok(rows)
}
