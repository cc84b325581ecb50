//! Dense real/complex matrix kernel.
//!
//! Storage and the heavy lifting (LU, symmetric eigendecomposition, Padé
//! exponential) come from `nalgebra`; this module adds the block views,
//! SPD square roots and JSON layout used throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealVector = DVector<f64>;
pub type ComplexVector = DVector<Complex64>;

/// Eigenvalue floor used by SPD square roots and positivity checks.
pub const SPD_EIGEN_FLOOR: f64 = 1e-12;

pub fn ensure_finite(m: &RealMatrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_finite_complex(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(m: &RealMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

/// Half the size of a square even-dimensional matrix.
pub fn half_dim(m: &RealMatrix) -> Result<usize> {
    let d = ensure_square(m)?;
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if d % 2 != 0 {
        return Err(Error::OddDimension(d));
    }
    Ok(d / 2)
}

/// The four n×n blocks `[[a, b], [c, d]]` of a 2n×2n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

impl Blocks {
    pub fn split(m: &RealMatrix) -> Result<Self> {
        let n = half_dim(m)?;
        Ok(Blocks {
            a: m.view((0, 0), (n, n)).into_owned(),
            b: m.view((0, n), (n, n)).into_owned(),
            c: m.view((n, 0), (n, n)).into_owned(),
            d: m.view((n, n), (n, n)).into_owned(),
        })
    }

    pub fn join(&self) -> RealMatrix {
        let n = self.a.nrows();
        let mut m = RealMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.c);
        m.view_mut((n, n), (n, n)).copy_from(&self.d);
        m
    }
}

pub fn complexify(re: &RealMatrix, im: &RealMatrix) -> ComplexMatrix {
    re.zip_map(im, Complex64::new)
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.im)
}

pub fn symmetry_residual(m: &RealMatrix) -> f64 {
    (m - m.transpose()).norm()
}

pub fn complex_symmetry_residual(m: &ComplexMatrix) -> f64 {
    (m - m.transpose()).norm()
}

pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

pub fn commutator(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a * b - b * a
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &RealMatrix) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn spd_eigen(m: &RealMatrix, what: &'static str) -> Result<nalgebra::SymmetricEigen<f64, nalgebra::Dyn>> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let res = symmetry_residual(m);
    if res > 1e-8 * (1.0 + m.norm()) {
        return Err(Error::NotSymmetric { what, residual: res });
    }
    let eig = symmetrize(m).symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > SPD_EIGEN_FLOOR) {
        return Err(Error::NotPositiveDefinite {
            what,
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

fn spd_power(m: &RealMatrix, what: &'static str, power: f64) -> Result<RealMatrix> {
    let eig = spd_eigen(m, what)?;
    let vals = eig.eigenvalues.map(|l| l.powf(power));
    let v = &eig.eigenvectors;
    Ok(v * RealMatrix::from_diagonal(&vals) * v.transpose())
}

/// Principal square root of a symmetric positive-definite matrix.
pub fn spd_sqrt(m: &RealMatrix, what: &'static str) -> Result<RealMatrix> {
    spd_power(m, what, 0.5)
}

pub fn spd_inv_sqrt(m: &RealMatrix, what: &'static str) -> Result<RealMatrix> {
    spd_power(m, what, -0.5)
}

pub fn inverse(m: &RealMatrix, what: &'static str) -> Result<RealMatrix> {
    ensure_square(m)?;
    let inv = m.clone().try_inverse().ok_or(Error::Singular(what))?;
    ensure_finite(&inv).map_err(|_| Error::Singular(what))?;
    Ok(inv)
}

pub fn inverse_complex(m: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let inv = m.clone().try_inverse().ok_or(Error::Singular(what))?;
    ensure_finite_complex(&inv).map_err(|_| Error::Singular(what))?;
    Ok(inv)
}

pub fn det_complex(m: &ComplexMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

/// Matrix exponential (Padé approximant with scaling and squaring).
pub fn expm(m: &RealMatrix) -> RealMatrix {
    m.exp()
}

/// 2-norm condition number.
pub fn condition_number(m: &RealMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// JSON layout `{"rows": r, "cols": c, "data": [...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl MatrixJson<f64> {
    pub fn from_real(m: &RealMatrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().copied().collect(),
        }
    }

    pub fn to_real(&self) -> Result<RealMatrix> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::dims(
                format!("{} entries", self.rows * self.cols),
                format!("{} entries", self.data.len()),
            ));
        }
        let m = RealMatrix::from_row_slice(self.rows, self.cols, &self.data);
        ensure_finite(&m)?;
        Ok(m)
    }
}

impl MatrixJson<[f64; 2]> {
    pub fn from_complex(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_complex(&self) -> Result<ComplexMatrix> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::dims(
                format!("{} entries", self.rows * self.cols),
                format!("{} entries", self.data.len()),
            ));
        }
        let entries: Vec<Complex64> = self.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let m = ComplexMatrix::from_row_slice(self.rows, self.cols, &entries);
        ensure_finite_complex(&m)?;
        Ok(m)
    }
}

/// `#[serde(with = "real_json")]` adaptor for [`RealMatrix`] fields.
pub mod real_json {
    use super::{MatrixJson, RealMatrix};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &RealMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_real(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RealMatrix, D::Error> {
        MatrixJson::<f64>::deserialize(d)?
            .to_real()
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "complex_json")]` adaptor, complex scalars as `[re, im]`.
pub mod complex_json {
    use super::{ComplexMatrix, MatrixJson};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_complex(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        MatrixJson::<[f64; 2]>::deserialize(d)?
            .to_complex()
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn blocks_round_trip() {
        let m = RealMatrix::from_fn(4, 4, |i, j| (4 * i + j) as f64);
        let b = Blocks::split(&m).unwrap();
        assert_eq!(b.b[(0, 1)], 3.0);
        assert_eq!(b.c[(1, 0)], 12.0);
        assert_eq!(b.join(), m);
    }

    #[test]
    fn odd_blocks_rejected() {
        let m = RealMatrix::identity(3, 3);
        assert_eq!(Blocks::split(&m), Err(Error::OddDimension(3)));
    }

    #[test]
    fn spd_sqrt_squares_back() {
        let m = RealMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let r = spd_sqrt(&m, "m").unwrap();
        assert_relative_eq!(&r * &r, m, epsilon = 1e-12);
        let ri = spd_inv_sqrt(&m, "m").unwrap();
        assert_relative_eq!(&r * &ri, RealMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn spd_sqrt_rejects_indefinite() {
        let m = RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(spd_sqrt(&m, "m"), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let g = RealMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
        let e = expm(&g);
        let expect = RealMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        assert_relative_eq!(e, expect, epsilon = 1e-14);
    }

    #[test]
    fn json_layout_is_row_major() {
        let m = RealMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let js = serde_json::to_string(&MatrixJson::from_real(&m)).unwrap();
        assert_eq!(js, r#"{"rows":2,"cols":3,"data":[1.0,2.0,3.0,4.0,5.0,6.0]}"#);
        let back: MatrixJson<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back.to_real().unwrap(), m);

        let c = complexify(&m, &(-&m));
        let js = serde_json::to_value(MatrixJson::from_complex(&c)).unwrap();
        assert_eq!(js["data"][1], serde_json::json!([2.0, -2.0]));
    }

    #[test]
    fn json_rejects_wrong_length() {
        let bad = MatrixJson { rows: 2, cols: 2, data: vec![1.0; 3] };
        assert!(bad.to_real().is_err());
    }
}
