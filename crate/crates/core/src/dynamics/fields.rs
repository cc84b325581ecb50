//! Lifted and reduced Hamiltonians, their vector fields, and the Hagedorn
//! and Heller parameter equations.

use num_complex::Complex64;

use crate::dynamics::hamiltonian::HamiltonianSpec;
use crate::dynamics::state::{HagedornState, HellerState};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, RealMatrix, RealVector};
use crate::reduction::ComplexStructure;
use crate::symplectic::{self, FrameMatrix};

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar >= 0.0 && hbar.is_finite()) {
        return Err(Error::Invalid(format!("hbar must be finite and non-negative, got {hbar}")));
    }
    Ok(())
}

fn check_square(m: &RealMatrix, d: usize) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(Error::dims(format!("{d}x{d}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// `H(z) + (ħ/4) Tr(G D²H(z))`, the common form of both lifted Hamiltonians.
fn corrected_energy(z: &RealVector, g: &RealMatrix, h: &HamiltonianSpec, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    check_square(g, z.len())?;
    let hess = h.hessian(z)?;
    Ok(h.eval(z)? + 0.25 * hbar * (g * hess).trace())
}

/// `J ∇_z [H + (ħ/4) Tr(G D²H)]` with `G` held fixed.
fn corrected_flow(z: &RealVector, g: &RealMatrix, h: &HamiltonianSpec, hbar: f64) -> Result<RealVector> {
    check_hbar(hbar)?;
    let j = symplectic::standard_j(h.n())?;
    let mut grad = h.gradient(z)?;
    if hbar != 0.0 {
        grad += h.weighted_hessian_gradient(z, g)? * (0.25 * hbar);
    }
    Ok(j * grad)
}

/// `J · ½(D²H + D²Hᵀ)`.
fn j_hessian(z: &RealVector, h: &HamiltonianSpec) -> Result<RealMatrix> {
    let j = symplectic::standard_j(h.n())?;
    Ok(j * linalg::symmetrize(&h.hessian(z)?))
}

pub(crate) fn lifted_hamiltonian_raw(z: &RealVector, e: &RealMatrix, h: &HamiltonianSpec, hbar: f64) -> Result<f64> {
    check_square(e, z.len())?;
    corrected_energy(z, &(e * e.transpose()), h, hbar)
}

/// `H^ħ(z, E) = H(z) + (ħ/4) Tr(Eᵀ D²H(z) E)`.
pub fn lifted_hamiltonian(z: &RealVector, e: &FrameMatrix, h: &HamiltonianSpec, hbar: f64) -> Result<f64> {
    lifted_hamiltonian_raw(z, e.matrix(), h, hbar)
}

pub(crate) fn reduced_hamiltonian_raw(z: &RealVector, zeta: &RealMatrix, h: &HamiltonianSpec, hbar: f64) -> Result<f64> {
    check_square(zeta, z.len())?;
    let j = symplectic::standard_j(h.n())?;
    corrected_energy(z, &(zeta * j), h, hbar)
}

/// `Ȟ^ħ(z, ζ) = H(z) + (ħ/4) Tr(ζ J D²H(z))`.
pub fn reduced_hamiltonian(z: &RealVector, zeta: &ComplexStructure, h: &HamiltonianSpec, hbar: f64) -> Result<f64> {
    reduced_hamiltonian_raw(z, zeta.matrix(), h, hbar)
}

pub(crate) fn vector_field_frame_raw(
    z: &RealVector,
    e: &RealMatrix,
    h: &HamiltonianSpec,
    hbar: f64,
) -> Result<(RealVector, RealMatrix)> {
    check_square(e, z.len())?;
    let dz = corrected_flow(z, &(e * e.transpose()), h, hbar)?;
    let de = j_hessian(z, h)? * e;
    Ok((dz, de))
}

/// Hamiltonian vector field of `H^ħ` for `Ω^ħ`:
/// `dz = J ∇_z H^ħ`, `dE = J D²H E`.
pub fn vector_field_frame(
    z: &RealVector,
    e: &FrameMatrix,
    h: &HamiltonianSpec,
    hbar: f64,
) -> Result<(RealVector, RealMatrix)> {
    vector_field_frame_raw(z, e.matrix(), h, hbar)
}

pub(crate) fn vector_field_reduced_raw(
    z: &RealVector,
    zeta: &RealMatrix,
    h: &HamiltonianSpec,
    hbar: f64,
) -> Result<(RealVector, RealMatrix)> {
    check_square(zeta, z.len())?;
    let j = symplectic::standard_j(h.n())?;
    let dz = corrected_flow(z, &(zeta * j), h, hbar)?;
    let dzeta = linalg::commutator(&j_hessian(z, h)?, zeta);
    Ok((dz, dzeta))
}

/// `dz = J ∇_z Ȟ^ħ`, `dζ = [J D²H, ζ]`.
pub fn vector_field_reduced(
    z: &RealVector,
    zeta: &ComplexStructure,
    h: &HamiltonianSpec,
    hbar: f64,
) -> Result<(RealVector, RealMatrix)> {
    vector_field_reduced_raw(z, zeta.matrix(), h, hbar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HagedornDerivative {
    pub dq: RealVector,
    pub dp: RealVector,
    pub dbig_q: ComplexMatrix,
    pub dbig_p: ComplexMatrix,
    pub ds: f64,
}

/// `q̇ = p/m`, `ṗ = −∇V`, `Q̇ = P/m`, `Ṗ = −D²V Q`, `Ṡ = |p|²/2m − V(q)`.
pub fn hagedorn_rhs(state: &HagedornState, h: &HamiltonianSpec) -> Result<HagedornDerivative> {
    let (mass, v) = h.require_separable()?;
    if state.n() != v.n() {
        return Err(Error::dims(v.n(), state.n()));
    }
    let q = state.q.as_slice();
    let hess = linalg::to_complex(&v.hessian(q));
    let inv_m = Complex64::new(1.0 / mass, 0.0);
    Ok(HagedornDerivative {
        dq: &state.p / mass,
        dp: -v.gradient(q),
        dbig_q: &state.big_p * inv_m,
        dbig_p: -(hess * &state.big_q),
        ds: state.p.norm_squared() / (2.0 * mass) - v.eval(q),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HellerDerivative {
    pub dq: RealVector,
    pub dp: RealVector,
    pub da: RealMatrix,
    pub db: RealMatrix,
    pub dphi: f64,
}

/// `Ȧ = −(A² − B²)/m − D²V`, `Ḃ = −(AB + BA)/m`,
/// `φ̇ = |p|²/2m − V(q) − (ħ/2m) Tr B`.
pub fn heller_rhs(state: &HellerState, h: &HamiltonianSpec, hbar: f64) -> Result<HellerDerivative> {
    check_hbar(hbar)?;
    let (mass, v) = h.require_separable()?;
    if state.n() != v.n() {
        return Err(Error::dims(v.n(), state.n()));
    }
    let q = state.q.as_slice();
    let (a, b) = (&state.a, &state.b);
    Ok(HellerDerivative {
        dq: &state.p / mass,
        dp: -v.gradient(q),
        da: -(a * a - b * b) / mass - v.hessian(q),
        db: -(a * b + b * a) / mass,
        dphi: state.p.norm_squared() / (2.0 * mass) - v.eval(q) - hbar / (2.0 * mass) * b.trace(),
    })
}
