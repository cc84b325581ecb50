//! Fixed-step time integration of frame, Hagedorn, Heller and reduced states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branch::BranchTracker;
use crate::dynamics::fields::{
    hagedorn_rhs, heller_rhs, lifted_hamiltonian_raw, reduced_hamiltonian_raw, vector_field_frame_raw,
    vector_field_reduced_raw,
};
use crate::dynamics::hamiltonian::HamiltonianSpec;
use crate::dynamics::state::{FrameState, HagedornState, HellerState, ReducedState};
use crate::dynamics::trajectory::{Checkpoint, Diagnostics, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{self, complexify, imag_part, real_part, ComplexMatrix, RealMatrix, RealVector};
use crate::reduction::{self, SiegelPoint};
use crate::symplectic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Matrix-exponential flow; quadratic Hamiltonians only.
    ExactQuadratic,
    Rk4,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub hbar: f64,
    /// Steps between recorded checkpoints.
    pub invariant_check_every: usize,
    /// Re-project the frame onto `Sp(2n,R)` after every step.
    pub project: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            dt: 1e-3,
            t_final: 10.0,
            scheme: Scheme::Rk4,
            hbar: 1.0,
            invariant_check_every: 10,
            project: false,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Invalid(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Invalid(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.invariant_check_every == 0 {
            return Err(Error::Invalid("invariant_check_every must be at least 1".into()));
        }
        if self.t_final / self.dt > 1e9 {
            return Err(Error::Invalid("more than 1e9 steps requested".into()));
        }
        Ok(())
    }

    /// Number of full steps and the length of a trailing partial step.
    pub fn step_plan(&self) -> (usize, Option<f64>) {
        let full = (self.t_final / self.dt + 1e-9).floor() as usize;
        let rem = self.t_final - full as f64 * self.dt;
        (full, (rem > 1e-9 * self.dt).then_some(rem))
    }
}

/// Exact affine flow `z ↦ M z + c` of `ż = J(Kz + b)` over one step, plus
/// the same flow at the two Gauss–Legendre nodes of the step.
#[derive(Debug, Clone)]
pub struct QuadraticPropagator {
    pub m: RealMatrix,
    pub shift: RealVector,
    nodes: [(RealMatrix, RealVector); 2],
    dt: f64,
}

fn affine_flow(jk: &RealMatrix, jb: &RealVector, t: f64) -> (RealMatrix, RealVector) {
    let d = jk.nrows();
    let mut x = RealMatrix::zeros(d + 1, d + 1);
    x.view_mut((0, 0), (d, d)).copy_from(&(jk * t));
    x.view_mut((0, d), (d, 1)).copy_from(&(jb * t));
    let ex = linalg::expm(&x);
    (ex.view((0, 0), (d, d)).into_owned(), ex.view((0, d), (d, 1)).column(0).into_owned())
}

impl QuadraticPropagator {
    pub fn new(h: &HamiltonianSpec, dt: f64) -> Result<Self> {
        let (k, b, _) = h
            .as_quadratic()
            .ok_or_else(|| Error::Unsupported("exact_quadratic needs a Hamiltonian of degree at most 2".into()))?;
        let j = symplectic::standard_j(h.n())?;
        let jk = &j * k;
        let jb = &j * b;
        let (m, shift) = affine_flow(&jk, &jb, dt);
        let offset = 0.5 / 3f64.sqrt();
        let nodes = [
            affine_flow(&jk, &jb, dt * (0.5 - offset)),
            affine_flow(&jk, &jb, dt * (0.5 + offset)),
        ];
        Ok(QuadraticPropagator { m, shift, nodes, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&self, z: &RealVector) -> RealVector {
        &self.m * z + &self.shift
    }

    /// Two-point Gauss–Legendre rule over the step; `f` receives the flow
    /// map at each node.
    fn quadrature(&self, mut f: impl FnMut(&RealMatrix, &RealVector) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.nodes {
            acc += f(m, c)?;
        }
        Ok(0.5 * self.dt * acc)
    }
}

/// `|p|²/2m − V(q)`.
fn lagrangian(z: &RealVector, h: &HamiltonianSpec) -> Result<f64> {
    let (mass, v) = h.require_separable()?;
    let n = v.n();
    Ok(z.rows(n, n).norm_squared() / (2.0 * mass) - v.eval(z.rows(0, n).as_slice()))
}

fn push_matrix(out: &mut Vec<f64>, m: &RealMatrix) {
    out.extend(m.iter());
}

fn read_matrix(v: &RealVector, offset: &mut usize, rows: usize, cols: usize) -> RealMatrix {
    let m = RealMatrix::from_column_slice(rows, cols, &v.as_slice()[*offset..*offset + rows * cols]);
    *offset += rows * cols;
    m
}

fn read_vector(v: &RealVector, offset: &mut usize, len: usize) -> RealVector {
    let out = v.rows(*offset, len).into_owned();
    *offset += len;
    out
}

fn row_major(m: &RealMatrix) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

fn matrix_headers(name: &str, n: usize) -> Vec<String> {
    (0..n).flat_map(|i| (0..n).map(move |j| format!("{name}_{i}_{j}"))).collect()
}

/// A state that can be advanced by the integrators.
pub trait Evolvable: Clone {
    fn n(&self) -> usize;
    fn z(&self) -> RealVector;
    fn to_flat(&self) -> RealVector;
    /// Inverse of `to_flat`, using `self` only for shape information.
    fn with_flat(&self, v: &RealVector) -> Self;
    fn rhs_flat(&self, h: &HamiltonianSpec, hbar: f64) -> Result<RealVector>;
    fn exact_step(&self, prop: &QuadraticPropagator, h: &HamiltonianSpec, hbar: f64) -> Result<Self>;
    /// Lifted or reduced ħ-Hamiltonian; `NaN` when it cannot be evaluated.
    fn energy(&self, h: &HamiltonianSpec, hbar: f64) -> f64;
    /// `j_o(E)` for states that carry a frame.
    fn orthogonal_momentum(&self) -> Option<RealMatrix> {
        None
    }
    fn constraint_residual(&self) -> f64;
    fn project(&self) -> Result<Self> {
        Ok(self.clone())
    }
    fn det_q(&self) -> Option<Complex64> {
        None
    }
    fn phase(&self) -> Option<f64> {
        None
    }
    fn block_headers(n: usize) -> Vec<String>;
    fn block_values(&self) -> Vec<f64>;
}

impl Evolvable for FrameState {
    fn n(&self) -> usize {
        FrameState::n(self)
    }

    fn z(&self) -> RealVector {
        self.z.clone()
    }

    fn to_flat(&self) -> RealVector {
        let mut out: Vec<f64> = self.z.iter().copied().collect();
        push_matrix(&mut out, &self.e);
        RealVector::from_vec(out)
    }

    fn with_flat(&self, v: &RealVector) -> Self {
        let d = self.z.len();
        let mut off = 0;
        let z = read_vector(v, &mut off, d);
        FrameState { z, e: read_matrix(v, &mut off, d, d) }
    }

    fn rhs_flat(&self, h: &HamiltonianSpec, hbar: f64) -> Result<RealVector> {
        let (dz, de) = vector_field_frame_raw(&self.z, &self.e, h, hbar)?;
        Ok(FrameState { z: dz, e: de }.to_flat())
    }

    fn exact_step(&self, prop: &QuadraticPropagator, _h: &HamiltonianSpec, _hbar: f64) -> Result<Self> {
        Ok(FrameState {
            z: prop.advance(&self.z),
            e: &prop.m * &self.e,
        })
    }

    fn energy(&self, h: &HamiltonianSpec, hbar: f64) -> f64 {
        lifted_hamiltonian_raw(&self.z, &self.e, h, hbar).unwrap_or(f64::NAN)
    }

    fn orthogonal_momentum(&self) -> Option<RealMatrix> {
        symplectic::j_o_matrix(&self.e).ok()
    }

    fn constraint_residual(&self) -> f64 {
        symplectic::symplectic_residual(&self.e).unwrap_or(f64::NAN)
    }

    fn project(&self) -> Result<Self> {
        Ok(FrameState {
            z: self.z.clone(),
            e: symplectic::project_to_symplectic(&self.e)?,
        })
    }

    fn block_headers(n: usize) -> Vec<String> {
        matrix_headers("E", 2 * n)
    }

    fn block_values(&self) -> Vec<f64> {
        row_major(&self.e).collect()
    }
}

impl Evolvable for HagedornState {
    fn n(&self) -> usize {
        HagedornState::n(self)
    }

    fn z(&self) -> RealVector {
        HagedornState::z(self)
    }

    fn to_flat(&self) -> RealVector {
        let mut out: Vec<f64> = self.q.iter().chain(self.p.iter()).copied().collect();
        for m in [&self.big_q, &self.big_p] {
            push_matrix(&mut out, &real_part(m));
            push_matrix(&mut out, &imag_part(m));
        }
        out.push(self.s);
        RealVector::from_vec(out)
    }

    fn with_flat(&self, v: &RealVector) -> Self {
        let n = self.n();
        let mut off = 0;
        let q = read_vector(v, &mut off, n);
        let p = read_vector(v, &mut off, n);
        let qr = read_matrix(v, &mut off, n, n);
        let qi = read_matrix(v, &mut off, n, n);
        let pr = read_matrix(v, &mut off, n, n);
        let pi = read_matrix(v, &mut off, n, n);
        HagedornState {
            q,
            p,
            big_q: complexify(&qr, &qi),
            big_p: complexify(&pr, &pi),
            s: v[off],
        }
    }

    fn rhs_flat(&self, h: &HamiltonianSpec, _hbar: f64) -> Result<RealVector> {
        let d = hagedorn_rhs(self, h)?;
        Ok(HagedornState {
            q: d.dq,
            p: d.dp,
            big_q: d.dbig_q,
            big_p: d.dbig_p,
            s: d.ds,
        }
        .to_flat())
    }

    fn exact_step(&self, prop: &QuadraticPropagator, h: &HamiltonianSpec, _hbar: f64) -> Result<Self> {
        let n = self.n();
        let z = HagedornState::z(self);
        let ds = prop.quadrature(|m, c| lagrangian(&(m * &z + c), h))?;
        let e = &prop.m * self.frame_matrix();
        let z1 = prop.advance(&z);
        let blk = linalg::Blocks::split(&e)?;
        Ok(HagedornState {
            q: z1.rows(0, n).into_owned(),
            p: z1.rows(n, n).into_owned(),
            big_q: complexify(&blk.a, &blk.b),
            big_p: complexify(&blk.c, &blk.d),
            s: self.s + ds,
        })
    }

    fn energy(&self, h: &HamiltonianSpec, hbar: f64) -> f64 {
        lifted_hamiltonian_raw(&HagedornState::z(self), &self.frame_matrix(), h, hbar).unwrap_or(f64::NAN)
    }

    fn orthogonal_momentum(&self) -> Option<RealMatrix> {
        symplectic::j_o_matrix(&self.frame_matrix()).ok()
    }

    fn constraint_residual(&self) -> f64 {
        HagedornState::constraint_residual(self)
    }

    fn project(&self) -> Result<Self> {
        let e = symplectic::project_to_symplectic(&self.frame_matrix())?;
        let blk = linalg::Blocks::split(&e)?;
        Ok(HagedornState {
            big_q: complexify(&blk.a, &blk.b),
            big_p: complexify(&blk.c, &blk.d),
            ..self.clone()
        })
    }

    fn det_q(&self) -> Option<Complex64> {
        Some(HagedornState::det_q(self))
    }

    fn phase(&self) -> Option<f64> {
        Some(self.s)
    }

    fn block_headers(n: usize) -> Vec<String> {
        let mut out = Vec::new();
        for name in ["Q", "P"] {
            for i in 0..n {
                for j in 0..n {
                    out.push(format!("{name}_{i}_{j}_re"));
                    out.push(format!("{name}_{i}_{j}_im"));
                }
            }
        }
        out
    }

    fn block_values(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(4 * n * n);
        for m in [&self.big_q, &self.big_p] {
            for i in 0..n {
                for j in 0..n {
                    out.push(m[(i, j)].re);
                    out.push(m[(i, j)].im);
                }
            }
        }
        out
    }
}

impl Evolvable for HellerState {
    fn n(&self) -> usize {
        HellerState::n(self)
    }

    fn z(&self) -> RealVector {
        HellerState::z(self)
    }

    fn to_flat(&self) -> RealVector {
        let mut out: Vec<f64> = self.q.iter().chain(self.p.iter()).copied().collect();
        push_matrix(&mut out, &self.a);
        push_matrix(&mut out, &self.b);
        out.push(self.phi);
        RealVector::from_vec(out)
    }

    fn with_flat(&self, v: &RealVector) -> Self {
        let n = self.n();
        let mut off = 0;
        let q = read_vector(v, &mut off, n);
        let p = read_vector(v, &mut off, n);
        let a = read_matrix(v, &mut off, n, n);
        let b = read_matrix(v, &mut off, n, n);
        HellerState { q, p, a, b, phi: v[off] }
    }

    fn rhs_flat(&self, h: &HamiltonianSpec, hbar: f64) -> Result<RealVector> {
        let d = heller_rhs(self, h, hbar)?;
        Ok(HellerState {
            q: d.dq,
            p: d.dp,
            a: d.da,
            b: d.db,
            phi: d.dphi,
        }
        .to_flat())
    }

    fn exact_step(&self, prop: &QuadraticPropagator, h: &HamiltonianSpec, hbar: f64) -> Result<Self> {
        let n = self.n();
        let (mass, _) = h.require_separable()?;
        let z = HellerState::z(self);
        let w = self.w_matrix();
        let dphi = prop.quadrature(|m, c| {
            let wt = reduction::mobius_matrix(m, &w)?;
            let tr_b: f64 = (0..n).map(|i| wt[(i, i)].im).sum();
            Ok(lagrangian(&(m * &z + c), h)? - hbar / (2.0 * mass) * tr_b)
        })?;
        let w1 = reduction::mobius_matrix(&prop.m, &w)?;
        let w1: ComplexMatrix = (&w1 + w1.transpose()) * Complex64::new(0.5, 0.0);
        let z1 = prop.advance(&z);
        Ok(HellerState {
            q: z1.rows(0, n).into_owned(),
            p: z1.rows(n, n).into_owned(),
            a: real_part(&w1),
            b: imag_part(&w1),
            phi: self.phi + dphi,
        })
    }

    fn energy(&self, h: &HamiltonianSpec, hbar: f64) -> f64 {
        let zeta = SiegelPoint::new(self.w_matrix()).and_then(|w| reduction::complex_structure_from_siegel(&w));
        match zeta {
            Ok(zeta) => reduced_hamiltonian_raw(&HellerState::z(self), zeta.matrix(), h, hbar).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }

    fn constraint_residual(&self) -> f64 {
        HellerState::constraint_residual(self)
    }

    fn project(&self) -> Result<Self> {
        Ok(HellerState {
            a: linalg::symmetrize(&self.a),
            b: linalg::symmetrize(&self.b),
            ..self.clone()
        })
    }

    fn phase(&self) -> Option<f64> {
        Some(self.phi)
    }

    fn block_headers(n: usize) -> Vec<String> {
        let mut out = matrix_headers("A", n);
        out.extend(matrix_headers("B", n));
        out
    }

    fn block_values(&self) -> Vec<f64> {
        row_major(&self.a).chain(row_major(&self.b)).collect()
    }
}

impl Evolvable for ReducedState {
    fn n(&self) -> usize {
        ReducedState::n(self)
    }

    fn z(&self) -> RealVector {
        self.z.clone()
    }

    fn to_flat(&self) -> RealVector {
        let mut out: Vec<f64> = self.z.iter().copied().collect();
        push_matrix(&mut out, &self.zeta);
        RealVector::from_vec(out)
    }

    fn with_flat(&self, v: &RealVector) -> Self {
        let d = self.z.len();
        let mut off = 0;
        let z = read_vector(v, &mut off, d);
        ReducedState { z, zeta: read_matrix(v, &mut off, d, d) }
    }

    fn rhs_flat(&self, h: &HamiltonianSpec, hbar: f64) -> Result<RealVector> {
        let (dz, dzeta) = vector_field_reduced_raw(&self.z, &self.zeta, h, hbar)?;
        Ok(ReducedState { z: dz, zeta: dzeta }.to_flat())
    }

    fn exact_step(&self, prop: &QuadraticPropagator, _h: &HamiltonianSpec, _hbar: f64) -> Result<Self> {
        let m_inv = symplectic::symplectic_inverse(&prop.m)?;
        Ok(ReducedState {
            z: prop.advance(&self.z),
            zeta: &prop.m * &self.zeta * m_inv,
        })
    }

    fn energy(&self, h: &HamiltonianSpec, hbar: f64) -> f64 {
        reduced_hamiltonian_raw(&self.z, &self.zeta, h, hbar).unwrap_or(f64::NAN)
    }

    fn constraint_residual(&self) -> f64 {
        ReducedState::constraint_residual(self)
    }

    fn block_headers(n: usize) -> Vec<String> {
        matrix_headers("zeta", 2 * n)
    }

    fn block_values(&self) -> Vec<f64> {
        row_major(&self.zeta).collect()
    }
}

fn rk4_step<S: Evolvable>(s: &S, h: &HamiltonianSpec, hbar: f64, dt: f64) -> Result<S> {
    let y = s.to_flat();
    let k1 = s.rhs_flat(h, hbar)?;
    let k2 = s.with_flat(&(&y + &k1 * (0.5 * dt))).rhs_flat(h, hbar)?;
    let k3 = s.with_flat(&(&y + &k2 * (0.5 * dt))).rhs_flat(h, hbar)?;
    let k4 = s.with_flat(&(&y + &k3 * dt)).rhs_flat(h, hbar)?;
    Ok(s.with_flat(&(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))))
}

pub const NEWTON_MAX_ITER: usize = 50;

/// Implicit midpoint rule solved by a chord Newton iteration with a
/// forward-difference Jacobian frozen at the start of the step.
fn implicit_midpoint_step<S: Evolvable>(s: &S, h: &HamiltonianSpec, hbar: f64, dt: f64, step: usize) -> Result<S> {
    let y0 = s.to_flat();
    let f = |y: &RealVector| s.with_flat(y).rhs_flat(h, hbar);
    let f0 = f(&y0)?;
    let dim = y0.len();
    let mut jac = RealMatrix::zeros(dim, dim);
    for i in 0..dim {
        let eps = 1e-7 * (1.0 + y0[i].abs());
        let mut yp = y0.clone();
        yp[i] += eps;
        jac.set_column(i, &((f(&yp)? - &f0) / eps));
    }
    let lu = (RealMatrix::identity(dim, dim) - jac * (0.5 * dt)).lu();
    let mut y1 = &y0 + &f0 * dt;
    for _ in 0..NEWTON_MAX_ITER {
        let mid = (&y0 + &y1) * 0.5;
        let g = &y1 - &y0 - f(&mid)? * dt;
        let delta = lu.solve(&g).ok_or(Error::NewtonFailure { step })?;
        y1 -= &delta;
        if !delta.iter().all(|x| x.is_finite()) {
            return Err(Error::NewtonFailure { step });
        }
        if delta.norm() <= 1e-13 * (1.0 + y1.norm()) {
            return Ok(s.with_flat(&y1));
        }
    }
    Err(Error::NewtonFailure { step })
}

fn at_step(step: usize, e: Error) -> Error {
    if e.step().is_some() {
        e
    } else {
        Error::AtStep { step, source: Box::new(e) }
    }
}

struct Monitor {
    energy0: f64,
    momentum0: Option<RealMatrix>,
}

impl Monitor {
    fn diagnostics<S: Evolvable>(&self, s: &S, h: &HamiltonianSpec, hbar: f64) -> Diagnostics {
        let noether_drift = match (&self.momentum0, s.orthogonal_momentum()) {
            (Some(m0), Some(m)) => (m - m0).norm(),
            _ => f64::NAN,
        };
        Diagnostics {
            noether_drift,
            constraint_residual: s.constraint_residual(),
            energy_drift: (s.energy(h, hbar) - self.energy0).abs(),
        }
    }
}

/// Integrates `initial` under `h` and records checkpoints at step 0, every
/// `invariant_check_every` steps and at `t_final`. Hagedorn trajectories
/// carry the continuously unwrapped `arg det Q`, which requires the phase of
/// `det Q` to move by less than π/2 per step.
pub fn integrate<S: Evolvable>(initial: &S, h: &HamiltonianSpec, cfg: &IntegrationConfig) -> Result<Trajectory<S>> {
    cfg.validate()?;
    if initial.n() != h.n() {
        return Err(Error::dims(format!("state dimension {}", h.n()), initial.n()));
    }
    if initial.to_flat().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (full, partial) = cfg.step_plan();
    let total = full + usize::from(partial.is_some());
    let props = match cfg.scheme {
        Scheme::ExactQuadratic => Some((
            QuadraticPropagator::new(h, cfg.dt)?,
            partial.map(|r| QuadraticPropagator::new(h, r)).transpose()?,
        )),
        _ => None,
    };
    let hbar = cfg.hbar;
    let monitor = Monitor {
        energy0: initial.energy(h, hbar),
        momentum0: initial.orthogonal_momentum(),
    };
    let mut tracker = initial.det_q().map(BranchTracker::new).transpose()?;
    let mut state = initial.clone();
    let mut checkpoints = vec![Checkpoint {
        step: 0,
        t: 0.0,
        diagnostics: monitor.diagnostics(&state, h, hbar),
        theta: tracker.map(|t| t.theta()),
        state: state.clone(),
    }];

    for k in 1..=total {
        let is_partial = k > full;
        let dt = if is_partial { partial.unwrap_or(cfg.dt) } else { cfg.dt };
        let next = match (&props, cfg.scheme) {
            (Some((full_prop, rem_prop)), _) => {
                let prop = if is_partial { rem_prop.as_ref().unwrap_or(full_prop) } else { full_prop };
                state.exact_step(prop, h, hbar)
            }
            (None, Scheme::ImplicitMidpoint) => implicit_midpoint_step(&state, h, hbar, dt, k),
            (None, _) => rk4_step(&state, h, hbar, dt),
        };
        state = next.map_err(|e| at_step(k, e))?;
        if cfg.project {
            state = state.project().map_err(|e| at_step(k, e))?;
        }
        if state.to_flat().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { step: k });
        }
        if let (Some(tr), Some(det)) = (tracker.as_mut(), state.det_q()) {
            tr.update(det).map_err(|e| at_step(k, e))?;
        }
        if k % cfg.invariant_check_every == 0 || k == total {
            let t = if is_partial { cfg.t_final } else { k as f64 * cfg.dt };
            checkpoints.push(Checkpoint {
                step: k,
                t,
                diagnostics: monitor.diagnostics(&state, h, hbar),
                theta: tracker.map(|t| t.theta()),
                state: state.clone(),
            });
        }
    }
    Ok(Trajectory { checkpoints, steps: total })
}
