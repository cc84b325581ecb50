//! Reduced-space geometry: compatible complex structures on `R^{2n}`, the
//! Siegel upper half space chart `W = A + iB`, the projection and Möbius
//! action of `Sp(2n,R)`, and the KKS / Siegel symplectic forms.

use num_complex::Complex64;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complexify, imag_part, real_part, Blocks, ComplexMatrix, ComplexVector, MatrixJson,
    RealMatrix,
};
use crate::symplectic::{self, AlgebraKind, FrameMatrix, LieAlgebraElement, DEFAULT_TOL};

/// Scale-aware tolerance: `tol · (1 + ‖m‖²)`.
fn scaled(tol: f64, norm: f64) -> f64 {
    tol * (1.0 + norm * norm)
}

/// A point `W = A + iB` of the Siegel upper half space: complex symmetric
/// with positive-definite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    w: ComplexMatrix,
}

impl SiegelPoint {
    pub fn new(w: ComplexMatrix) -> Result<Self> {
        if w.nrows() != w.ncols() || w.nrows() == 0 {
            return Err(Error::dims("non-empty square matrix", format!("{}x{}", w.nrows(), w.ncols())));
        }
        linalg::ensure_finite_complex(&w)?;
        let residual = linalg::complex_symmetry_residual(&w);
        if residual > scaled(DEFAULT_TOL, w.norm()) {
            return Err(Error::NotSymmetric { what: "Siegel point W", residual });
        }
        let w = (&w + w.transpose()) * Complex64::new(0.5, 0.0);
        let min = linalg::min_symmetric_eigenvalue(&imag_part(&w));
        if !(min > linalg::SPD_EIGEN_FLOOR) {
            return Err(Error::NotPositiveDefinite {
                what: "Im W",
                min_eigenvalue: min,
            });
        }
        Ok(SiegelPoint { w })
    }

    pub fn from_parts(a: &RealMatrix, b: &RealMatrix) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::dims(format!("{:?}", a.shape()), format!("{:?}", b.shape())));
        }
        Self::new(complexify(a, b))
    }

    /// `iI`, the image of the identity frame.
    pub fn i_identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Self::new(ComplexMatrix::identity(n, n) * Complex64::i())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.w
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// `A = Re W`.
    pub fn a(&self) -> RealMatrix {
        real_part(&self.w)
    }

    /// `B = Im W`.
    pub fn b(&self) -> RealMatrix {
        imag_part(&self.w)
    }
}

impl Serialize for SiegelPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_complex(&self.w).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixJson::<[f64; 2]>::deserialize(d)?
            .to_complex()
            .map_err(D::Error::custom)?;
        SiegelPoint::new(w).map_err(D::Error::custom)
    }
}

/// An ω-compatible complex structure: `ζ² = −I`, `ζ ∈ Sp(2n,R)` and
/// `g_ζ(u, v) = ω(u, ζv)` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    zeta: RealMatrix,
}

impl ComplexStructure {
    /// Residuals are compared against `tol · (1 + ‖ζ‖²)`.
    pub fn with_tol(zeta: RealMatrix, tol: f64) -> Result<Self> {
        let n = linalg::half_dim(&zeta)?;
        linalg::ensure_finite(&zeta)?;
        let d = 2 * n;
        let limit = scaled(tol, zeta.norm());
        let square = (&zeta * &zeta + RealMatrix::identity(d, d)).norm();
        if square > limit {
            return Err(Error::Membership {
                what: "complex structure (ζ² = −I)",
                residual: square,
                tol: limit,
            });
        }
        let sympl = symplectic::symplectic_residual(&zeta)?;
        if sympl > limit {
            return Err(Error::Membership {
                what: "complex structure (ζ symplectic)",
                residual: sympl,
                tol: limit,
            });
        }
        let min = linalg::min_symmetric_eigenvalue(&compatible_metric_matrix(&zeta));
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                what: "g_ζ",
                min_eigenvalue: min,
            });
        }
        Ok(ComplexStructure { zeta })
    }

    pub fn new(zeta: RealMatrix) -> Result<Self> {
        Self::with_tol(zeta, DEFAULT_TOL)
    }

    /// `−J`, the image of the identity frame.
    pub fn standard(n: usize) -> Result<Self> {
        Ok(ComplexStructure {
            zeta: -symplectic::standard_j(n)?,
        })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.zeta
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.zeta
    }

    pub fn n(&self) -> usize {
        self.zeta.nrows() / 2
    }

    /// Matrix of `g_ζ(u, v) = ω(u, ζv)` in the standard basis.
    pub fn metric(&self) -> RealMatrix {
        compatible_metric_matrix(&self.zeta)
    }
}

fn compatible_metric_matrix(zeta: &RealMatrix) -> RealMatrix {
    let j = symplectic::standard_j(zeta.nrows() / 2).expect("even dimension");
    linalg::symmetrize(&(j * zeta))
}

/// `W = (P1 + iP2)(Q1 + iQ2)^{-1}` for a symplectic frame `[[Q1, Q2], [P1, P2]]`.
pub fn siegel_from_symplectic_frame(s: &FrameMatrix) -> Result<SiegelPoint> {
    let blk = Blocks::split(s.matrix())?;
    let q = complexify(&blk.a, &blk.b);
    let p = complexify(&blk.c, &blk.d);
    let q_inv = linalg::inverse_complex(&q, "Q1 + iQ2 (frame outside chart domain)")?;
    SiegelPoint::new(p * q_inv)
}

/// Möbius action `W ↦ (C + DW)(A + BW)^{-1}` of `S = [[A, B], [C, D]]`.
pub fn mobius(s: &FrameMatrix, w: &SiegelPoint) -> Result<SiegelPoint> {
    SiegelPoint::new(mobius_matrix(s.matrix(), w.matrix())?)
}

/// Unchecked Möbius action on raw matrices.
pub fn mobius_matrix(s: &RealMatrix, w: &ComplexMatrix) -> Result<ComplexMatrix> {
    let blk = Blocks::split(s)?;
    if w.nrows() != blk.a.nrows() || w.ncols() != blk.a.nrows() {
        return Err(Error::dims(
            format!("{}x{}", blk.a.nrows(), blk.a.nrows()),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    let num = linalg::to_complex(&blk.c) + linalg::to_complex(&blk.d) * w;
    let den = linalg::to_complex(&blk.a) + linalg::to_complex(&blk.b) * w;
    Ok(num * linalg::inverse_complex(&den, "A + BW")?)
}

/// `ζ = −S Sᵀ J = Ad_S(−J)`.
pub fn complex_structure_from_frame(s: &FrameMatrix) -> Result<ComplexStructure> {
    ComplexStructure::new(symplectic::j_sp(s).into_matrix())
}

/// Canonical section `[[B^{-1/2}, 0], [A B^{-1/2}, B^{1/2}]]` of the projection.
pub fn frame_from_siegel(w: &SiegelPoint) -> Result<FrameMatrix> {
    let a = w.a();
    let b = w.b();
    let b_half = linalg::spd_sqrt(&b, "Im W")?;
    let b_inv_half = linalg::spd_inv_sqrt(&b, "Im W")?;
    let n = w.n();
    let e = Blocks {
        c: &a * &b_inv_half,
        a: b_inv_half,
        b: RealMatrix::zeros(n, n),
        d: b_half,
    }
    .join();
    let tol = scaled(DEFAULT_TOL, e.norm());
    FrameMatrix::symplectic(e, tol)
}

/// Chart image of ζ via the SPD symplectic square root of `ζJ`.
pub fn siegel_from_complex_structure(zeta: &ComplexStructure) -> Result<SiegelPoint> {
    let j = symplectic::standard_j(zeta.n())?;
    let s = linalg::spd_sqrt(&(zeta.matrix() * j), "ζJ")?;
    siegel_from_symplectic_frame(&FrameMatrix::new(s)?)
}

pub fn complex_structure_from_siegel(w: &SiegelPoint) -> Result<ComplexStructure> {
    complex_structure_from_frame(&frame_from_siegel(w)?)
}

/// Basis of a negative Lagrangian subspace of `C^{2n}`, stored as the
/// columns of a 2n×n complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    columns: ComplexMatrix,
}

impl LagrangianFrame {
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        let n = columns.ncols();
        if n == 0 || columns.nrows() != 2 * n {
            return Err(Error::dims(
                format!("2n x n with n = {n}"),
                format!("{}x{}", columns.nrows(), n),
            ));
        }
        let j = linalg::to_complex(&symplectic::standard_j(n)?);
        let iso = (columns.transpose() * &j * &columns).norm();
        let limit = scaled(DEFAULT_TOL, columns.norm());
        if iso > limit {
            return Err(Error::Membership {
                what: "Lagrangian frame isotropy",
                residual: iso,
                tol: limit,
            });
        }
        let frame = LagrangianFrame { columns };
        let s = frame.s_matrix();
        let hermitian = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
        let max = hermitian
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(max < 0.0) {
            return Err(Error::NotPositiveDefinite {
                what: "−s restricted to the frame",
                min_eigenvalue: -max,
            });
        }
        Ok(frame)
    }

    pub fn columns(&self) -> &ComplexMatrix {
        &self.columns
    }

    /// Gram matrix `s(c_α, c_β)` of the sesquilinear form on the columns.
    pub fn s_matrix(&self) -> ComplexMatrix {
        let n = self.columns.ncols();
        ComplexMatrix::from_fn(n, n, |a, b| {
            sesquilinear_s(
                &self.columns.column(a).into_owned(),
                &self.columns.column(b).into_owned(),
            )
            .expect("columns share a dimension")
        })
    }
}

/// Columns `e_α + Σ_β W_{βα} e_{n+β}`, i.e. the matrix `[I; W]`.
pub fn lagrangian_frame_from_siegel(w: &SiegelPoint) -> Result<LagrangianFrame> {
    let n = w.n();
    let mut cols = ComplexMatrix::zeros(2 * n, n);
    cols.view_mut((0, 0), (n, n)).fill_with_identity();
    cols.view_mut((n, 0), (n, n)).copy_from(w.matrix());
    LagrangianFrame::new(cols)
}

/// Complex-bilinear extension of `ω(v, w) = vᵀJw`.
pub fn omega_complex(w: &ComplexVector, z: &ComplexVector) -> Result<Complex64> {
    if w.len() != z.len() {
        return Err(Error::dims(w.len(), z.len()));
    }
    if w.is_empty() || !w.len().is_multiple_of(2) {
        return Err(Error::OddDimension(w.len()));
    }
    let n = w.len() / 2;
    Ok((0..n).map(|i| w[i] * z[n + i] - w[n + i] * z[i]).sum())
}

/// `s(w, z) = −i ω(w, z̄)`.
pub fn sesquilinear_s(w: &ComplexVector, z: &ComplexVector) -> Result<Complex64> {
    Ok(-Complex64::i() * omega_complex(w, &z.conjugate())?)
}

fn require_sp(xi: &LieAlgebraElement) -> Result<()> {
    match xi.kind() {
        AlgebraKind::Sp => Ok(()),
        _ => {
            let residual = symplectic::sp_algebra_residual(xi.matrix())?;
            if residual <= DEFAULT_TOL {
                Ok(())
            } else {
                Err(Error::Membership {
                    what: "sp(2n) element",
                    residual,
                    tol: DEFAULT_TOL,
                })
            }
        }
    }
}

/// KKS form `(Ω⁺)_η(ad_ξ η, ad_ζ η) = ½ Tr(η [ξ, ζ])`.
pub fn kks_form(eta: &ComplexStructure, xi: &LieAlgebraElement, zeta: &LieAlgebraElement) -> Result<f64> {
    require_sp(xi)?;
    require_sp(zeta)?;
    if xi.matrix().shape() != eta.matrix().shape() || zeta.matrix().shape() != eta.matrix().shape() {
        return Err(Error::dims(
            format!("{:?}", eta.matrix().shape()),
            format!("{:?} / {:?}", xi.matrix().shape(), zeta.matrix().shape()),
        ));
    }
    let bracket = linalg::commutator(xi.matrix(), zeta.matrix());
    symplectic::trace_form(eta.matrix(), &bracket)
}

/// Tangent vector `(dA, dB)` to the Siegel upper half space, both symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelTangent {
    pub da: RealMatrix,
    pub db: RealMatrix,
}

impl SiegelTangent {
    pub fn new(da: RealMatrix, db: RealMatrix) -> Result<Self> {
        if da.shape() != db.shape() || da.nrows() != da.ncols() {
            return Err(Error::dims(format!("{:?}", da.shape()), format!("{:?}", db.shape())));
        }
        for (what, m) in [("dA", &da), ("dB", &db)] {
            let residual = linalg::symmetry_residual(m);
            if residual > DEFAULT_TOL * (1.0 + m.norm()) {
                return Err(Error::NotSymmetric { what, residual });
            }
        }
        Ok(SiegelTangent { da, db })
    }

    /// Tangent `dW = dA + i dB` from a complex displacement.
    pub fn from_complex(dw: &ComplexMatrix) -> Result<Self> {
        Self::new(real_part(dw), imag_part(dw))
    }

    pub fn as_complex(&self) -> ComplexMatrix {
        complexify(&self.da, &self.db)
    }
}

/// `Ω_Σ(dW1, dW2) = Tr(B⁻¹dA1 B⁻¹dB2 − B⁻¹dB1 B⁻¹dA2)`.
pub fn siegel_form_at(w: &SiegelPoint, t1: &SiegelTangent, t2: &SiegelTangent) -> Result<f64> {
    let n = w.n();
    for t in [t1, t2] {
        if t.da.nrows() != n {
            return Err(Error::dims(n, t.da.nrows()));
        }
    }
    let b_inv = linalg::inverse(&w.b(), "Im W")?;
    let first = &b_inv * &t1.da * &b_inv * &t2.db;
    let second = &b_inv * &t1.db * &b_inv * &t2.da;
    Ok(first.trace() - second.trace())
}

/// Coordinates of `ad_ξ(−J)` at `W = iI`: `dA = ξ₁₂ + ξ₂₁`, `dB = ξ₂₂ − ξ₁₁`.
pub fn orbit_tangent_coords(xi: &LieAlgebraElement) -> Result<SiegelTangent> {
    require_sp(xi)?;
    let blk = Blocks::split(xi.matrix())?;
    SiegelTangent::new(&blk.b + &blk.c, &blk.d - &blk.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_sp_element, random_symplectic, seeded_rng, standard_j};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shear(cc: f64) -> FrameMatrix {
        FrameMatrix::new(RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, cc, 1.0])).unwrap()
    }

    #[test]
    fn projection_examples() {
        let id = FrameMatrix::identity(2).unwrap();
        assert_eq!(siegel_from_symplectic_frame(&id).unwrap(), SiegelPoint::i_identity(2).unwrap());
        let w = siegel_from_symplectic_frame(&shear(0.3)).unwrap();
        assert_relative_eq!(w.matrix()[(0, 0)].re, 0.3, epsilon = 1e-15);
        assert_relative_eq!(w.matrix()[(0, 0)].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn non_symplectic_frame_fails_invariants() {
        // det(Q1 + iQ2) != 0 but Im W is indefinite.
        let e = FrameMatrix::new(RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(siegel_from_symplectic_frame(&e).is_err());
    }

    #[test]
    fn mobius_examples() {
        let w = SiegelPoint::new(ComplexMatrix::from_element(1, 1, c(0.4, 2.0))).unwrap();
        assert_eq!(mobius(&FrameMatrix::identity(1).unwrap(), &w).unwrap(), w);
        let j = FrameMatrix::new(standard_j(1).unwrap()).unwrap();
        let i1 = SiegelPoint::i_identity(1).unwrap();
        let fixed = mobius(&j, &i1).unwrap();
        assert_relative_eq!(fixed.matrix()[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(fixed.matrix()[(0, 0)].im, 1.0, epsilon = 1e-15);
        let moved = mobius(&shear(-1.5), &w).unwrap();
        assert_relative_eq!(moved.matrix()[(0, 0)].re, 0.4 - 1.5, epsilon = 1e-15);
        assert_relative_eq!(moved.matrix()[(0, 0)].im, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mobius_is_a_group_action() {
        let s1 = random_symplectic(2, 1).unwrap();
        let s2 = random_symplectic(2, 2).unwrap();
        let w = siegel_from_symplectic_frame(&random_symplectic(2, 3).unwrap()).unwrap();
        let prod = FrameMatrix::new(s1.matrix() * s2.matrix()).unwrap();
        let lhs = mobius(&prod, &w).unwrap();
        let rhs = mobius(&s1, &mobius(&s2, &w).unwrap()).unwrap();
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-10);
    }

    #[test]
    fn complex_structure_examples() {
        let id = FrameMatrix::identity(2).unwrap();
        assert_eq!(
            complex_structure_from_frame(&id).unwrap(),
            ComplexStructure::standard(2).unwrap()
        );
        for seed in 0..20 {
            let s = random_symplectic(2, seed).unwrap();
            let z = complex_structure_from_frame(&s).unwrap();
            let sq = z.matrix() * z.matrix() + RealMatrix::identity(4, 4);
            assert!(sq.norm() < 1e-9);
            assert!(linalg::min_symmetric_eigenvalue(&z.metric()) > 0.0);
            assert_eq!(z.matrix(), symplectic::j_sp(&s).matrix());
        }
    }

    #[test]
    fn complex_structure_rejects_non_compatible() {
        // +J squares to −I and is symplectic but g is negative definite.
        assert!(ComplexStructure::new(standard_j(1).unwrap()).is_err());
        assert!(ComplexStructure::new(RealMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn frame_from_siegel_examples() {
        let e = frame_from_siegel(&SiegelPoint::i_identity(2).unwrap()).unwrap();
        assert_relative_eq!(e.matrix(), &RealMatrix::identity(4, 4), epsilon = 1e-15);
        let w = SiegelPoint::new(ComplexMatrix::from_element(1, 1, c(0.0, 2.0))).unwrap();
        let e = frame_from_siegel(&w).unwrap();
        let r = 2f64.sqrt();
        assert_relative_eq!(
            e.matrix(),
            &RealMatrix::from_row_slice(2, 2, &[1.0 / r, 0.0, 0.0, r]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn siegel_complex_structure_examples() {
        let z = ComplexStructure::standard(3).unwrap();
        let w = siegel_from_complex_structure(&z).unwrap();
        assert!((w.matrix() - SiegelPoint::i_identity(3).unwrap().matrix()).norm() < 1e-14);
        let back = complex_structure_from_siegel(&w).unwrap();
        assert!((back.matrix() - z.matrix()).norm() < 1e-14);
    }

    #[test]
    fn lagrangian_frame_examples() {
        let f = lagrangian_frame_from_siegel(&SiegelPoint::i_identity(1).unwrap()).unwrap();
        assert_eq!(f.columns()[(0, 0)], c(1.0, 0.0));
        assert_eq!(f.columns()[(1, 0)], c(0.0, 1.0));
        let w = siegel_from_symplectic_frame(&random_symplectic(2, 8).unwrap()).unwrap();
        let f = lagrangian_frame_from_siegel(&w).unwrap();
        for a in 0..2 {
            let ca = f.columns().column(a).into_owned();
            assert!(sesquilinear_s(&ca, &ca).unwrap().re < 0.0);
            for b in 0..2 {
                let cb = f.columns().column(b).into_owned();
                assert!(omega_complex(&ca, &cb).unwrap().norm() < 1e-12);
            }
        }
        // Gram matrix of s on [I; W] is −2B.
        assert!((f.s_matrix() - linalg::to_complex(&(w.b() * -2.0))).norm() < 1e-12);
    }

    #[test]
    fn lagrangian_frame_rejects_positive_subspace() {
        // Γ̄ of iI: columns (1, −i) are isotropic but s-positive.
        let cols = ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, -1.0)]);
        assert!(LagrangianFrame::new(cols).is_err());
    }

    #[test]
    fn sesquilinear_examples() {
        let w = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(sesquilinear_s(&w, &w).unwrap(), c(-2.0, 0.0));
        let g2 = ComplexVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(sesquilinear_s(&g2, &g2).unwrap(), c(0.0, 0.0));
        let z = ComplexVector::from_vec(vec![c(0.3, -1.2), c(2.0, 0.5)]);
        let swz = sesquilinear_s(&w, &z).unwrap();
        let szw = sesquilinear_s(&z, &w).unwrap();
        assert_relative_eq!(swz.re, szw.re, epsilon = 1e-15);
        assert_relative_eq!(swz.im, -szw.im, epsilon = 1e-15);
        assert_eq!(sesquilinear_s(&z, &z).unwrap().im, 0.0);
    }

    #[test]
    fn kks_matches_block_expansion() {
        let mut rng = seeded_rng(4);
        for n in 1..=3 {
            let xi = random_sp_element(n, &mut rng);
            let ze = random_sp_element(n, &mut rng);
            let x = Blocks::split(&xi).unwrap();
            let z = Blocks::split(&ze).unwrap();
            let half = |x: &Blocks, z: &Blocks| {
                -(&x.c * &z.a + &x.d * &z.c) + (&x.a * &z.b + &x.b * &z.d)
            };
            let expansion = 0.5 * (half(&x, &z) - half(&z, &x)).trace();
            let eta = ComplexStructure::standard(n).unwrap();
            let kks = kks_form(
                &eta,
                &LieAlgebraElement::sp(xi.clone()).unwrap(),
                &LieAlgebraElement::sp(ze.clone()).unwrap(),
            )
            .unwrap();
            assert_relative_eq!(kks, expansion, epsilon = 1e-12);
            let same = kks_form(&eta, &LieAlgebraElement::sp(xi.clone()).unwrap(), &LieAlgebraElement::sp(xi).unwrap()).unwrap();
            assert_eq!(same, 0.0);
        }
    }

    #[test]
    fn kks_rejects_non_sp() {
        let eta = ComplexStructure::standard(1).unwrap();
        let bad = LieAlgebraElement::gl(RealMatrix::identity(2, 2)).unwrap();
        let good = LieAlgebraElement::sp(standard_j(1).unwrap()).unwrap();
        assert!(kks_form(&eta, &bad, &good).is_err());
    }

    #[test]
    fn siegel_form_examples() {
        let w = SiegelPoint::i_identity(1).unwrap();
        let t1 = SiegelTangent::new(RealMatrix::from_element(1, 1, 2.0), RealMatrix::from_element(1, 1, 3.0)).unwrap();
        let t2 = SiegelTangent::new(RealMatrix::from_element(1, 1, -1.0), RealMatrix::from_element(1, 1, 5.0)).unwrap();
        assert_eq!(siegel_form_at(&w, &t1, &t2).unwrap(), 2.0 * 5.0 - -3.0);
        assert_eq!(siegel_form_at(&w, &t1, &t1).unwrap(), 0.0);
        let nonsym = RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(SiegelTangent::new(nonsym, RealMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn orbit_tangent_examples() {
        let zero = LieAlgebraElement::sp(RealMatrix::zeros(2, 2)).unwrap();
        let t = orbit_tangent_coords(&zero).unwrap();
        assert_eq!(t.da, RealMatrix::zeros(1, 1));
        assert_eq!(t.db, RealMatrix::zeros(1, 1));
        let xi = LieAlgebraElement::sp(RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let t = orbit_tangent_coords(&xi).unwrap();
        assert_eq!(t.da[(0, 0)], 2.0);
        assert_eq!(t.db[(0, 0)], 0.0);
        let not_sp = LieAlgebraElement::gl(RealMatrix::identity(2, 2)).unwrap();
        assert!(orbit_tangent_coords(&not_sp).is_err());
    }

    #[test]
    fn siegel_point_json() {
        let w = SiegelPoint::new(ComplexMatrix::from_element(1, 1, c(0.5, 2.0))).unwrap();
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, r#"{"rows":1,"cols":1,"data":[[0.5,2.0]]}"#);
        let back: SiegelPoint = serde_json::from_str(&js).unwrap();
        assert_eq!(back, w);
        let bad = r#"{"rows":1,"cols":1,"data":[[0.5,-2.0]]}"#;
        assert!(serde_json::from_str::<SiegelPoint>(bad).is_err());
    }
}
