//! Symplectic linear algebra on `M_{2n}(R)`: the canonical forms, group and
//! algebra membership, the two momentum maps of the commuting
//! `Sp(2n,R) × O(2n)` action on frames, and seeded sampling of group elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RealMatrix, RealVector};

/// Default absolute Frobenius tolerance for membership tests.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Frames with `|det| <= DEGENERACY_THRESHOLD` are rejected.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Frames whose condition number exceeds this are flagged by [`metric_from_frame`].
pub const MAX_CONDITION: f64 = 1e12;

/// `J = [[0, I], [-I, 0]]` of size 2n.
pub fn standard_j(n: usize) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    Ok(j)
}

fn j_for(m: &RealMatrix) -> Result<RealMatrix> {
    standard_j(linalg::half_dim(m)?)
}

fn same_shape(a: &RealMatrix, b: &RealMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    Ok(())
}

/// Canonical form `ω(v, w) = vᵀ J w` on `R^{2n}`.
pub fn omega_vec(v: &RealVector, w: &RealVector) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::dims(v.len(), w.len()));
    }
    if v.is_empty() {
        return Err(Error::ZeroDimension);
    }
    if !v.len().is_multiple_of(2) {
        return Err(Error::OddDimension(v.len()));
    }
    let n = v.len() / 2;
    Ok((0..n).map(|i| v[i] * w[n + i] - v[n + i] * w[i]).sum())
}

/// `Ω(V, W) = Tr(Vᵀ J W)`, the column-wise sum of [`omega_vec`].
pub fn big_omega(v: &RealMatrix, w: &RealMatrix) -> Result<f64> {
    same_shape(v, w)?;
    let j = j_for(v)?;
    Ok((v.transpose() * j * w).trace())
}

/// Trace form `⟨⟨ξ, ζ⟩⟩ = ½ Tr(ξζ)`.
pub fn trace_form(xi: &RealMatrix, zeta: &RealMatrix) -> Result<f64> {
    linalg::ensure_square(xi)?;
    same_shape(xi, zeta)?;
    Ok(0.5 * xi.component_mul(&zeta.transpose()).sum())
}

/// `‖EᵀJE − J‖_F`.
pub fn symplectic_residual(e: &RealMatrix) -> Result<f64> {
    let j = j_for(e)?;
    Ok((e.transpose() * &j * e - j).norm())
}

pub fn is_symplectic(e: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(e)? <= tol)
}

pub fn orthogonal_residual(e: &RealMatrix) -> Result<f64> {
    let d = linalg::ensure_square(e)?;
    Ok((e.transpose() * e - RealMatrix::identity(d, d)).norm())
}

pub fn is_orthogonal(e: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(orthogonal_residual(e)? <= tol)
}

/// `‖ξᵀJ + Jξ‖_F`.
pub fn sp_algebra_residual(xi: &RealMatrix) -> Result<f64> {
    let j = j_for(xi)?;
    Ok((xi.transpose() * &j + &j * xi).norm())
}

pub fn is_sp_algebra(xi: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(sp_algebra_residual(xi)? <= tol)
}

pub fn o_algebra_residual(xi: &RealMatrix) -> Result<f64> {
    linalg::ensure_square(xi)?;
    Ok((xi.transpose() + xi).norm())
}

pub fn is_o_algebra(xi: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(o_algebra_residual(xi)? <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Sp,
    O,
    Gl,
}

/// An element of `sp(2n,R)`, `o(2n)` or `gl(2n,R)`, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    xi: RealMatrix,
    kind: AlgebraKind,
}

impl LieAlgebraElement {
    pub fn new(xi: RealMatrix, kind: AlgebraKind, tol: f64) -> Result<Self> {
        linalg::ensure_finite(&xi)?;
        let residual = match kind {
            AlgebraKind::Sp => sp_algebra_residual(&xi)?,
            AlgebraKind::O => o_algebra_residual(&xi)?,
            AlgebraKind::Gl => {
                linalg::ensure_square(&xi)?;
                0.0
            }
        };
        if residual > tol {
            let what = match kind {
                AlgebraKind::Sp => "sp(2n) element",
                AlgebraKind::O => "o(2n) element",
                AlgebraKind::Gl => "gl element",
            };
            return Err(Error::Membership { what, residual, tol });
        }
        Ok(LieAlgebraElement { xi, kind })
    }

    pub fn sp(xi: RealMatrix) -> Result<Self> {
        Self::new(xi, AlgebraKind::Sp, DEFAULT_TOL)
    }

    pub fn o(xi: RealMatrix) -> Result<Self> {
        Self::new(xi, AlgebraKind::O, DEFAULT_TOL)
    }

    pub fn gl(xi: RealMatrix) -> Result<Self> {
        Self::new(xi, AlgebraKind::Gl, DEFAULT_TOL)
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.xi
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.xi
    }
}

/// A point of `GL(2n,R)`: an invertible real 2n×2n frame matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    e: RealMatrix,
}

impl FrameMatrix {
    pub fn new(e: RealMatrix) -> Result<Self> {
        linalg::half_dim(&e)?;
        linalg::ensure_finite(&e)?;
        let det = e.determinant();
        if !(det.abs() > DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateFrame {
                det,
                threshold: DEGENERACY_THRESHOLD,
            });
        }
        Ok(FrameMatrix { e })
    }

    /// A frame required to lie in `Sp(2n,R)` within `tol`.
    pub fn symplectic(e: RealMatrix, tol: f64) -> Result<Self> {
        let f = Self::new(e)?;
        let residual = symplectic_residual(&f.e)?;
        if residual > tol {
            return Err(Error::Membership {
                what: "symplectic frame",
                residual,
                tol,
            });
        }
        Ok(f)
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(FrameMatrix {
            e: RealMatrix::identity(2 * n, 2 * n),
        })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.e
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.e
    }

    /// Half-dimension n.
    pub fn n(&self) -> usize {
        self.e.nrows() / 2
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        symplectic_residual(&self.e).map(|r| r <= tol).unwrap_or(false)
    }
}

/// `−E Eᵀ J`, defined on all of `M_{2n}(R)`.
pub fn j_sp_matrix(e: &RealMatrix) -> Result<RealMatrix> {
    let j = j_for(e)?;
    Ok(-(e * e.transpose()) * j)
}

/// `−Eᵀ J E`, defined on all of `M_{2n}(R)`.
pub fn j_o_matrix(e: &RealMatrix) -> Result<RealMatrix> {
    let j = j_for(e)?;
    Ok(-(e.transpose() * j * e))
}

/// `sp(2n)`-valued momentum map of the left `Sp(2n,R)` action.
pub fn j_sp(e: &FrameMatrix) -> LieAlgebraElement {
    LieAlgebraElement {
        xi: j_sp_matrix(&e.e).expect("frame has even square shape"),
        kind: AlgebraKind::Sp,
    }
}

/// `o(2n)`-valued momentum map of the right `O(2n)` action.
pub fn j_o(e: &FrameMatrix) -> LieAlgebraElement {
    LieAlgebraElement {
        xi: j_o_matrix(&e.e).expect("frame has even square shape"),
        kind: AlgebraKind::O,
    }
}

/// Metric in which the columns of `E` are orthonormal: `(E Eᵀ)^{-1}`.
pub fn metric_from_frame(e: &FrameMatrix) -> Result<RealMatrix> {
    let cond = linalg::condition_number(&e.e);
    if !(cond < MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    let g = linalg::inverse(&(&e.e * e.e.transpose()), "E Eᵀ")?;
    Ok(linalg::symmetrize(&g))
}

/// `S^{-1} = −J Sᵀ J` for symplectic `S`.
pub fn symplectic_inverse(s: &RealMatrix) -> Result<RealMatrix> {
    let j = j_for(s)?;
    Ok(-(&j * s.transpose() * &j))
}

/// `Ad_S ξ = S ξ S^{-1}` with a general inverse.
pub fn adjoint(s: &RealMatrix, xi: &RealMatrix) -> Result<RealMatrix> {
    let inv = linalg::inverse(s, "Ad_S")?;
    Ok(s * xi * inv)
}

/// Projection of a square matrix onto `sp(2n,R)`: `½(X + J Xᵀ J)`.
pub fn project_sp(x: &RealMatrix) -> Result<RealMatrix> {
    let j = j_for(x)?;
    Ok((x + &j * x.transpose() * &j) * 0.5)
}

/// Projection onto `o(2n)`: `½(X − Xᵀ)`.
pub fn project_o(x: &RealMatrix) -> RealMatrix {
    (x - x.transpose()) * 0.5
}

/// Newton iteration `E ← ½(E + J E^{-T} Jᵀ)` converging to the symplectic
/// polar factor of a nearly symplectic `E`.
pub fn project_to_symplectic(e: &RealMatrix) -> Result<RealMatrix> {
    let j = j_for(e)?;
    let mut x = e.clone();
    for _ in 0..32 {
        if symplectic_residual(&x)? <= 1e-15 * (1.0 + x.norm_squared()) {
            break;
        }
        let inv_t = linalg::inverse(&x, "symplectic projection")?.transpose();
        let next = (&x + &j * inv_t * j.transpose()) * 0.5;
        let step = (&next - &x).norm();
        x = next;
        if step <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok(x)
}

fn uniform_matrix<R: Rng>(d: usize, rng: &mut R) -> RealMatrix {
    RealMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..=1.0))
}

/// Random `sp(2n)` element: uniform entries in [−1, 1], projected onto the algebra.
pub fn random_sp_element<R: Rng>(n: usize, rng: &mut R) -> RealMatrix {
    project_sp(&uniform_matrix(2 * n, rng)).expect("even square matrix")
}

pub fn random_o_element<R: Rng>(n: usize, rng: &mut R) -> RealMatrix {
    project_o(&uniform_matrix(2 * n, rng))
}

/// Random element of `sp(2n) ∩ o(2n)` (the Lie algebra of `U(n)`).
pub fn random_u_element<R: Rng>(n: usize, rng: &mut R) -> RealMatrix {
    project_sp(&random_o_element(n, rng)).expect("even square matrix")
}

pub fn random_symplectic_with<R: Rng>(n: usize, rng: &mut R) -> FrameMatrix {
    FrameMatrix {
        e: linalg::expm(&random_sp_element(n, rng)),
    }
}

pub fn random_orthogonal_with<R: Rng>(n: usize, rng: &mut R) -> FrameMatrix {
    FrameMatrix {
        e: linalg::expm(&random_o_element(n, rng)),
    }
}

pub fn random_gl_with<R: Rng>(n: usize, rng: &mut R) -> FrameMatrix {
    loop {
        let e = uniform_matrix(2 * n, rng);
        if e.determinant().abs() > 1e-6 {
            return FrameMatrix { e };
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(ξ)` for a seeded random `ξ ∈ sp(2n,R)`.
pub fn random_symplectic(n: usize, seed: u64) -> Result<FrameMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(random_symplectic_with(n, &mut seeded_rng(seed)))
}

/// `exp(ξ)` for a seeded random antisymmetric `ξ`.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<FrameMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(random_orthogonal_with(n, &mut seeded_rng(seed)))
}

/// Uniform entries in [−1, 1], resampled until `|det| > 1e-6`.
pub fn random_gl(n: usize, seed: u64) -> Result<FrameMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(random_gl_with(n, &mut seeded_rng(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: usize, data: &[f64]) -> RealMatrix {
        RealMatrix::from_row_slice(rows, data.len() / rows, data)
    }

    #[test]
    fn standard_j_blocks() {
        assert_eq!(standard_j(1).unwrap(), m(2, &[0.0, 1.0, -1.0, 0.0]));
        let j = standard_j(2).unwrap();
        assert_eq!(j[(0, 2)], 1.0);
        assert_eq!(j[(1, 3)], 1.0);
        assert_eq!(j[(2, 0)], -1.0);
        assert_eq!(j[(3, 1)], -1.0);
        assert_eq!(j.iter().filter(|x| **x != 0.0).count(), 4);
        assert_eq!(standard_j(0), Err(Error::ZeroDimension));
    }

    #[test]
    fn j_squares_to_minus_identity() {
        for n in 1..=8 {
            let j = standard_j(n).unwrap();
            let err = (&j * &j + RealMatrix::identity(2 * n, 2 * n)).norm();
            assert!(err <= 1e-14);
        }
    }

    #[test]
    fn omega_vec_examples() {
        let v = RealVector::from_vec(vec![1.0, 0.0]);
        let w = RealVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(omega_vec(&v, &w).unwrap(), 1.0);
        assert_eq!(omega_vec(&v, &v).unwrap(), 0.0);
        let v = RealVector::from_vec(vec![2.0, 3.0]);
        let w = RealVector::from_vec(vec![5.0, 7.0]);
        assert_eq!(omega_vec(&v, &w).unwrap(), -1.0);
        assert_eq!(omega_vec(&w, &v).unwrap(), 1.0);
        let short = RealVector::from_vec(vec![1.0]);
        assert!(matches!(omega_vec(&v, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn big_omega_examples() {
        let i = RealMatrix::identity(2, 2);
        let j = standard_j(1).unwrap();
        assert_eq!(big_omega(&i, &i).unwrap(), 0.0);
        assert_eq!(big_omega(&i, &j).unwrap(), -2.0);
        assert!(big_omega(&i, &RealMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn big_omega_is_column_sum_of_omega_vec() {
        let mut rng = seeded_rng(3);
        let v = uniform_matrix(4, &mut rng);
        let w = uniform_matrix(4, &mut rng);
        let by_columns: f64 = (0..4)
            .map(|a| omega_vec(&v.column(a).into_owned(), &w.column(a).into_owned()).unwrap())
            .sum();
        assert_relative_eq!(big_omega(&v, &w).unwrap(), by_columns, epsilon = 1e-14);
        assert_relative_eq!(big_omega(&w, &v).unwrap(), -by_columns, epsilon = 1e-14);
    }

    #[test]
    fn trace_form_examples() {
        let j = standard_j(1).unwrap();
        assert_eq!(trace_form(&j, &j).unwrap(), -1.0);
        assert_eq!(trace_form(&RealMatrix::zeros(2, 2), &j).unwrap(), 0.0);
        let mut rng = seeded_rng(11);
        for _ in 0..50 {
            let xi = uniform_matrix(4, &mut rng);
            assert!(trace_form(&xi, &xi.transpose()).unwrap() > 0.0);
        }
    }

    #[test]
    fn trace_form_nondegenerate_on_sp() {
        // Gram matrix on a basis of sp(4): ξ = J S, S running over symmetric unit matrices.
        let n = 2;
        let j = standard_j(n).unwrap();
        let d = 2 * n;
        let mut basis = Vec::new();
        for a in 0..d {
            for b in a..d {
                let mut s = RealMatrix::zeros(d, d);
                s[(a, b)] = 1.0;
                s[(b, a)] = 1.0;
                basis.push(&j * s);
            }
        }
        assert_eq!(basis.len(), n * (2 * n + 1));
        let k = basis.len();
        let gram = RealMatrix::from_fn(k, k, |r, c| trace_form(&basis[r], &basis[c]).unwrap());
        assert_eq!(gram.rank(1e-10), k);
    }

    #[test]
    fn membership_examples() {
        let i = RealMatrix::identity(2, 2);
        let j = standard_j(1).unwrap();
        assert!(is_symplectic(&i, DEFAULT_TOL).unwrap());
        assert!(is_symplectic(&j, DEFAULT_TOL).unwrap());
        assert!(!is_symplectic(&m(2, &[2.0, 0.0, 0.0, 1.0]), DEFAULT_TOL).unwrap());
        assert!(is_sp_algebra(&j, DEFAULT_TOL).unwrap());
        assert!(is_o_algebra(&j, DEFAULT_TOL).unwrap());
        assert!(!is_orthogonal(&(&i * 2.0), DEFAULT_TOL).unwrap());
        assert_eq!(
            is_symplectic(&RealMatrix::identity(3, 3), DEFAULT_TOL),
            Err(Error::OddDimension(3))
        );
    }

    #[test]
    fn momentum_map_examples() {
        let id = FrameMatrix::identity(1).unwrap();
        let j = standard_j(1).unwrap();
        assert_eq!(j_sp(&id).matrix(), &(-&j));
        assert_eq!(j_o(&id).matrix(), &(-&j));
        let a = 1.7;
        let e = FrameMatrix::new(m(2, &[a, 0.0, 0.0, 1.0 / a])).unwrap();
        assert_relative_eq!(
            j_sp(&e).into_matrix(),
            m(2, &[0.0, -a * a, 1.0 / (a * a), 0.0]),
            epsilon = 1e-14
        );
        let s = random_symplectic(2, 5).unwrap();
        assert_relative_eq!(
            j_o(&s).into_matrix(),
            -standard_j(2).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn metric_examples() {
        let id = FrameMatrix::identity(1).unwrap();
        assert_eq!(metric_from_frame(&id).unwrap(), RealMatrix::identity(2, 2));
        let e = FrameMatrix::new(RealMatrix::identity(2, 2) * 2.0).unwrap();
        assert_relative_eq!(
            metric_from_frame(&e).unwrap(),
            RealMatrix::identity(2, 2) * 0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ill_conditioned_frame_flagged() {
        let e = FrameMatrix::new(m(2, &[1e7, 0.0, 0.0, 1e-7])).unwrap();
        assert!(matches!(metric_from_frame(&e), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn degenerate_frame_rejected() {
        let e = m(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(FrameMatrix::new(e), Err(Error::DegenerateFrame { .. })));
        assert!(matches!(
            FrameMatrix::new(RealMatrix::identity(3, 3)),
            Err(Error::OddDimension(3))
        ));
    }

    #[test]
    fn random_samples() {
        for seed in 0..100 {
            let s = random_symplectic(2, seed).unwrap();
            assert!(is_symplectic(s.matrix(), 1e-10).unwrap(), "seed {seed}");
        }
        assert_eq!(random_symplectic(3, 42).unwrap(), random_symplectic(3, 42).unwrap());
        assert_ne!(random_symplectic(3, 42).unwrap(), random_symplectic(3, 43).unwrap());
        for seed in 0..20 {
            let o = random_orthogonal(2, seed).unwrap();
            assert!((o.matrix().determinant().abs() - 1.0).abs() <= 1e-10);
            assert!(is_orthogonal(o.matrix(), 1e-10).unwrap());
            assert!(random_gl(2, seed).unwrap().matrix().determinant().abs() > 1e-6);
        }
        let mut rng = seeded_rng(9);
        let u = random_u_element(2, &mut rng);
        assert!(is_sp_algebra(&u, 1e-14).unwrap() && is_o_algebra(&u, 1e-14).unwrap());
    }

    #[test]
    fn projection_restores_symplecticity() {
        let s = random_symplectic(2, 1).unwrap().into_matrix();
        let mut rng = seeded_rng(2);
        let perturbed = &s + uniform_matrix(4, &mut rng) * 1e-6;
        assert!(!is_symplectic(&perturbed, 1e-9).unwrap());
        let p = project_to_symplectic(&perturbed).unwrap();
        assert!(is_symplectic(&p, 1e-12).unwrap());
        assert!((&p - &s).norm() < 1e-5);
    }
}
