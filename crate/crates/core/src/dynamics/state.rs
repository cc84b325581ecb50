//! Phase-space states carried by the integrators.
//!
//! Fields are public so that intermediate stages of explicit schemes can hold
//! values that are only approximately on the constraint manifolds. The
//! constructors validate; the residual methods measure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, complexify, imag_part, real_part, Blocks, ComplexMatrix, RealMatrix, RealVector};
use crate::reduction::{self, ComplexStructure, SiegelPoint};
use crate::symplectic::{self, FrameMatrix};

/// Absolute tolerance used when constructing Hagedorn states, scaled by
/// `1 + ‖Q‖‖P‖`.
pub const HAGEDORN_TOL: f64 = 1e-8;

fn check_phase_point(q: &RealVector, p: &RealVector) -> Result<usize> {
    let n = q.len();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if p.len() != n {
        return Err(Error::dims(n, p.len()));
    }
    if q.iter().chain(p.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(n)
}

fn check_square(m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    linalg::ensure_finite_complex(m)
}

fn join_z(q: &RealVector, p: &RealVector) -> RealVector {
    let n = q.len();
    let mut z = RealVector::zeros(2 * n);
    z.rows_mut(0, n).copy_from(q);
    z.rows_mut(n, n).copy_from(p);
    z
}

fn split_z(z: &RealVector) -> Result<(RealVector, RealVector)> {
    if z.is_empty() || !z.len().is_multiple_of(2) {
        return Err(Error::OddDimension(z.len()));
    }
    let n = z.len() / 2;
    Ok((z.rows(0, n).into_owned(), z.rows(n, n).into_owned()))
}

/// `(z, E)` on `T*R^n × GL(2n,R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub z: RealVector,
    pub e: RealMatrix,
}

impl FrameState {
    pub fn new(z: RealVector, e: FrameMatrix) -> Result<Self> {
        if z.len() != 2 * e.n() {
            return Err(Error::dims(2 * e.n(), z.len()));
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(FrameState { z, e: e.into_matrix() })
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn frame(&self) -> Result<FrameMatrix> {
        FrameMatrix::new(self.e.clone())
    }
}

/// Hagedorn parameters `(q, p, Q, P, S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HagedornState {
    pub q: RealVector,
    pub p: RealVector,
    pub big_q: ComplexMatrix,
    pub big_p: ComplexMatrix,
    pub s: f64,
}

impl HagedornState {
    pub fn new(q: RealVector, p: RealVector, big_q: ComplexMatrix, big_p: ComplexMatrix, s: f64) -> Result<Self> {
        let n = check_phase_point(&q, &p)?;
        check_square(&big_q, n)?;
        check_square(&big_p, n)?;
        if !s.is_finite() {
            return Err(Error::NonFinite);
        }
        let state = HagedornState { q, p, big_q, big_p, s };
        let (r1, r2) = state.constraint_residuals();
        let tol = HAGEDORN_TOL * (1.0 + state.big_q.norm() * state.big_p.norm());
        if r1 > tol {
            return Err(Error::Membership { what: "QᵀP − PᵀQ = 0", residual: r1, tol });
        }
        if r2 > tol {
            return Err(Error::Membership { what: "Q†P − P†Q = 2iI", residual: r2, tol });
        }
        Ok(state)
    }

    /// `Q = I`, `P = iI`, `S = 0` centred at `(q, p)`.
    pub fn coherent(q: RealVector, p: RealVector) -> Result<Self> {
        let n = check_phase_point(&q, &p)?;
        let id = ComplexMatrix::identity(n, n);
        Self::new(q, p, id.clone(), id * Complex64::i(), 0.0)
    }

    /// Builds `Q = Q1 + iQ2`, `P = P1 + iP2` from `E = [[Q1, Q2], [P1, P2]]`.
    pub fn from_frame(z: &RealVector, e: &FrameMatrix, s: f64) -> Result<Self> {
        let (q, p) = split_z(z)?;
        let blk = Blocks::split(e.matrix())?;
        Self::new(q, p, complexify(&blk.a, &blk.b), complexify(&blk.c, &blk.d), s)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn z(&self) -> RealVector {
        join_z(&self.q, &self.p)
    }

    /// `E = [[Re Q, Im Q], [Re P, Im P]]`.
    pub fn frame_matrix(&self) -> RealMatrix {
        Blocks {
            a: real_part(&self.big_q),
            b: imag_part(&self.big_q),
            c: real_part(&self.big_p),
            d: imag_part(&self.big_p),
        }
        .join()
    }

    /// `(‖QᵀP − PᵀQ‖, ‖Q†P − P†Q − 2iI‖)`.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let n = self.n();
        let qt_p = self.big_q.transpose() * &self.big_p;
        let qh_p = self.big_q.adjoint() * &self.big_p;
        let r1 = (&qt_p - qt_p.transpose()).norm();
        let target = ComplexMatrix::identity(n, n) * Complex64::new(0.0, 2.0);
        let r2 = (&qh_p - qh_p.adjoint() - target).norm();
        (r1, r2)
    }

    pub fn constraint_residual(&self) -> f64 {
        let (r1, r2) = self.constraint_residuals();
        r1.max(r2)
    }

    pub fn det_q(&self) -> Complex64 {
        linalg::det_complex(&self.big_q)
    }

    /// `W = P Q^{-1}`, unchecked.
    pub fn w_matrix(&self) -> Result<ComplexMatrix> {
        Ok(&self.big_p * linalg::inverse_complex(&self.big_q, "Q")?)
    }

    pub fn siegel(&self) -> Result<SiegelPoint> {
        SiegelPoint::new(self.w_matrix()?)
    }

    /// Hagedorn data with the same wave packet, from the canonical section
    /// `Q = B^{-1/2}`, `P = W B^{-1/2}`. `det Q > 0`, so `S = φ` on the
    /// principal branch.
    pub fn from_heller(h: &HellerState) -> Result<Self> {
        let w = h.siegel()?;
        let e = reduction::frame_from_siegel(&w)?;
        Self::from_frame(&h.z(), &e, h.phi)
    }
}

/// Heller parameters `(q, p, A, B, φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HellerState {
    pub q: RealVector,
    pub p: RealVector,
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub phi: f64,
}

impl HellerState {
    pub fn new(q: RealVector, p: RealVector, a: RealMatrix, b: RealMatrix, phi: f64) -> Result<Self> {
        let n = check_phase_point(&q, &p)?;
        for (m, what) in [(&a, "A"), (&b, "B")] {
            if m.shape() != (n, n) {
                return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
            linalg::ensure_finite(m)?;
            let residual = linalg::symmetry_residual(m);
            if residual > 1e-10 * (1.0 + m.norm()) {
                return Err(Error::NotSymmetric { what, residual });
            }
        }
        if !phi.is_finite() {
            return Err(Error::NonFinite);
        }
        let w = SiegelPoint::from_parts(&a, &b)?;
        Ok(HellerState { q, p, a: w.a(), b: w.b(), phi })
    }

    pub fn from_siegel(q: RealVector, p: RealVector, w: &SiegelPoint, phi: f64) -> Result<Self> {
        Self::new(q, p, w.a(), w.b(), phi)
    }

    /// `A = 0`, `B = I`, `φ = 0` centred at `(q, p)`.
    pub fn coherent(q: RealVector, p: RealVector) -> Result<Self> {
        let n = check_phase_point(&q, &p)?;
        Self::new(q, p, RealMatrix::zeros(n, n), RealMatrix::identity(n, n), 0.0)
    }

    /// Heller data for a Hagedorn state: `W = P Q^{-1}` and
    /// `φ = S − (ħ/2) θ`, where `θ` is the chosen branch of `arg det Q`.
    pub fn from_hagedorn(h: &HagedornState, hbar: f64, theta: f64) -> Result<Self> {
        let w = h.siegel()?;
        Self::from_siegel(h.q.clone(), h.p.clone(), &w, h.s - 0.5 * hbar * theta)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn z(&self) -> RealVector {
        join_z(&self.q, &self.p)
    }

    pub fn w_matrix(&self) -> ComplexMatrix {
        complexify(&self.a, &self.b)
    }

    pub fn siegel(&self) -> Result<SiegelPoint> {
        SiegelPoint::new(self.w_matrix())
    }

    /// Symmetry defect of `W` plus the positive-definiteness shortfall of `B`.
    pub fn constraint_residual(&self) -> f64 {
        let sym = linalg::symmetry_residual(&self.a) + linalg::symmetry_residual(&self.b);
        let min = linalg::min_symmetric_eigenvalue(&linalg::symmetrize(&self.b));
        sym + (-min).max(0.0)
    }
}

/// `(z, ζ)` on `T*R^n × Sp(2n,R)/U(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub z: RealVector,
    pub zeta: RealMatrix,
}

impl ReducedState {
    pub fn new(z: RealVector, zeta: ComplexStructure) -> Result<Self> {
        if z.len() != 2 * zeta.n() {
            return Err(Error::dims(2 * zeta.n(), z.len()));
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ReducedState { z, zeta: zeta.into_matrix() })
    }

    /// `(z, j_sp(E))`.
    pub fn from_frame_state(f: &FrameState) -> Result<Self> {
        Ok(ReducedState {
            z: f.z.clone(),
            zeta: symplectic::j_sp_matrix(&f.e)?,
        })
    }

    pub fn from_heller(h: &HellerState) -> Result<Self> {
        let zeta = reduction::complex_structure_from_siegel(&h.siegel()?)?;
        Self::new(h.z(), zeta)
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn complex_structure(&self) -> Result<ComplexStructure> {
        ComplexStructure::new(self.zeta.clone())
    }

    /// `‖ζ² + I‖`.
    pub fn constraint_residual(&self) -> f64 {
        let d = self.zeta.nrows();
        (&self.zeta * &self.zeta + RealMatrix::identity(d, d)).norm()
    }
}
