//! Hamiltonians on `T*R^n` with analytic derivatives up to third order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RealMatrix, RealVector};

/// `coeff · Π q_i^{powers[i]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    /// Value of `∂^{orders} m` at `q`.
    fn partial(&self, q: &[f64], orders: &[u32]) -> f64 {
        let mut value = self.coeff;
        for ((&x, &pow), &ord) in q.iter().zip(&self.powers).zip(orders) {
            if ord > pow {
                return 0.0;
            }
            let falling: f64 = (0..ord).map(|k| (pow - k) as f64).product();
            value *= falling * x.powi((pow - ord) as i32);
        }
        value
    }

    fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }
}

/// Polynomial potential `V(q)` on `R^n` given by a coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<Monomial>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        for t in &terms {
            if t.powers.len() != n {
                return Err(Error::dims(format!("{n} exponents"), format!("{} exponents", t.powers.len())));
            }
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Polynomial { n, terms })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// `½ Σ ω_i² q_i²` (unit-mass convention: pass `m ω²` for other masses).
    pub fn isotropic_quadratic(n: usize, stiffness: f64) -> Result<Self> {
        let terms = (0..n)
            .map(|i| {
                let mut powers = vec![0; n];
                powers[i] = 2;
                Monomial { coeff: 0.5 * stiffness, powers }
            })
            .collect();
        Self::new(n, terms)
    }

    /// One-dimensional `Σ_k c_k q^k`.
    pub fn univariate(coeffs: &[f64]) -> Result<Self> {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &coeff)| Monomial { coeff, powers: vec![k as u32] })
            .collect();
        Self::new(1, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    fn partial(&self, q: &[f64], orders: &[u32]) -> f64 {
        self.terms.iter().map(|t| t.partial(q, orders)).sum()
    }

    fn orders(&self, idx: &[usize]) -> Vec<u32> {
        let mut o = vec![0; self.n];
        for &i in idx {
            o[i] += 1;
        }
        o
    }

    pub fn eval(&self, q: &[f64]) -> f64 {
        self.partial(q, &vec![0; self.n])
    }

    pub fn gradient(&self, q: &[f64]) -> RealVector {
        RealVector::from_fn(self.n, |i, _| self.partial(q, &self.orders(&[i])))
    }

    pub fn hessian(&self, q: &[f64]) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.partial(q, &self.orders(&[i, j])))
    }

    /// `c ↦ Σ_{ab} g_ab ∂_a ∂_b ∂_c V(q)`.
    pub fn third_contracted(&self, q: &[f64], g: &RealMatrix) -> RealVector {
        RealVector::from_fn(self.n, |c, _| {
            let mut acc = 0.0;
            for a in 0..self.n {
                for b in 0..self.n {
                    if g[(a, b)] != 0.0 {
                        acc += g[(a, b)] * self.partial(q, &self.orders(&[a, b, c]));
                    }
                }
            }
            acc
        })
    }
}

/// A Hamiltonian on `T*R^n`, `z = (q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    /// `H(z) = ½ zᵀKz + bᵀz + c`.
    Quadratic { k: RealMatrix, b: RealVector, c: f64 },
    /// `H(q, p) = |p|²/2m + V(q)`.
    Separable { mass: f64, potential: Polynomial },
}

impl HamiltonianSpec {
    pub fn quadratic(k: RealMatrix, b: RealVector, c: f64) -> Result<Self> {
        linalg::half_dim(&k)?;
        linalg::ensure_finite(&k)?;
        if b.len() != k.nrows() {
            return Err(Error::dims(k.nrows(), b.len()));
        }
        let residual = linalg::symmetry_residual(&k);
        if residual > 1e-12 * (1.0 + k.norm()) {
            return Err(Error::NotSymmetric { what: "K", residual });
        }
        if !c.is_finite() || b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(HamiltonianSpec::Quadratic {
            k: linalg::symmetrize(&k),
            b,
            c,
        })
    }

    pub fn separable(mass: f64, potential: Polynomial) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Invalid(format!("mass must be positive, got {mass}")));
        }
        Ok(HamiltonianSpec::Separable { mass, potential })
    }

    /// `p²/2m + ½ m ω² q²` in every coordinate.
    pub fn harmonic(n: usize, mass: f64, omega: f64) -> Result<Self> {
        Self::separable(mass, Polynomial::isotropic_quadratic(n, mass * omega * omega)?)
    }

    pub fn free(n: usize, mass: f64) -> Result<Self> {
        Self::separable(mass, Polynomial::zero(n)?)
    }

    pub fn n(&self) -> usize {
        match self {
            HamiltonianSpec::Quadratic { k, .. } => k.nrows() / 2,
            HamiltonianSpec::Separable { potential, .. } => potential.n(),
        }
    }

    fn check_z(&self, z: &RealVector) -> Result<()> {
        if z.len() != 2 * self.n() {
            return Err(Error::dims(2 * self.n(), z.len()));
        }
        Ok(())
    }

    pub fn eval(&self, z: &RealVector) -> Result<f64> {
        self.check_z(z)?;
        Ok(match self {
            HamiltonianSpec::Quadratic { k, b, c } => 0.5 * z.dot(&(k * z)) + b.dot(z) + c,
            HamiltonianSpec::Separable { mass, potential } => {
                let n = potential.n();
                let q = z.rows(0, n);
                let p = z.rows(n, n);
                p.norm_squared() / (2.0 * mass) + potential.eval(q.as_slice())
            }
        })
    }

    pub fn gradient(&self, z: &RealVector) -> Result<RealVector> {
        self.check_z(z)?;
        Ok(match self {
            HamiltonianSpec::Quadratic { k, b, .. } => k * z + b,
            HamiltonianSpec::Separable { mass, potential } => {
                let n = potential.n();
                let mut g = RealVector::zeros(2 * n);
                g.rows_mut(0, n).copy_from(&potential.gradient(z.rows(0, n).as_slice()));
                g.rows_mut(n, n).copy_from(&(z.rows(n, n) / *mass));
                g
            }
        })
    }

    pub fn hessian(&self, z: &RealVector) -> Result<RealMatrix> {
        self.check_z(z)?;
        Ok(match self {
            HamiltonianSpec::Quadratic { k, .. } => k.clone(),
            HamiltonianSpec::Separable { mass, potential } => {
                let n = potential.n();
                let mut h = RealMatrix::zeros(2 * n, 2 * n);
                h.view_mut((0, 0), (n, n))
                    .copy_from(&potential.hessian(z.rows(0, n).as_slice()));
                h.view_mut((n, n), (n, n))
                    .copy_from(&(RealMatrix::identity(n, n) / *mass));
                h
            }
        })
    }

    /// Gradient in `z` of `Tr(G · D²H(z))` for a fixed weight matrix `G`.
    pub fn weighted_hessian_gradient(&self, z: &RealVector, g: &RealMatrix) -> Result<RealVector> {
        self.check_z(z)?;
        let d = 2 * self.n();
        if g.shape() != (d, d) {
            return Err(Error::dims(format!("{d}x{d}"), format!("{:?}", g.shape())));
        }
        Ok(match self {
            HamiltonianSpec::Quadratic { .. } => RealVector::zeros(d),
            HamiltonianSpec::Separable { potential, .. } => {
                let n = potential.n();
                let gs = linalg::symmetrize(&g.view((0, 0), (n, n)).into_owned());
                let mut out = RealVector::zeros(d);
                out.rows_mut(0, n)
                    .copy_from(&potential.third_contracted(z.rows(0, n).as_slice(), &gs));
                out
            }
        })
    }

    /// `(K, b, c)` when the Hessian is constant.
    pub fn as_quadratic(&self) -> Option<(RealMatrix, RealVector, f64)> {
        match self {
            HamiltonianSpec::Quadratic { k, b, c } => Some((k.clone(), b.clone(), *c)),
            HamiltonianSpec::Separable { potential, .. } => {
                if potential.degree() > 2 {
                    return None;
                }
                let z0 = RealVector::zeros(2 * potential.n());
                let k = self.hessian(&z0).ok()?;
                let b = self.gradient(&z0).ok()?;
                let c = self.eval(&z0).ok()?;
                Some((k, b, c))
            }
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            HamiltonianSpec::Separable { mass, .. } => Some(*mass),
            HamiltonianSpec::Quadratic { .. } => None,
        }
    }

    pub fn potential(&self) -> Option<&Polynomial> {
        match self {
            HamiltonianSpec::Separable { potential, .. } => Some(potential),
            HamiltonianSpec::Quadratic { .. } => None,
        }
    }

    pub(crate) fn require_separable(&self) -> Result<(f64, &Polynomial)> {
        match self {
            HamiltonianSpec::Separable { mass, potential } => Ok((*mass, potential)),
            HamiltonianSpec::Quadratic { .. } => Err(Error::Unsupported(
                "Hagedorn/Heller parameter equations need a separable Hamiltonian".into(),
            )),
        }
    }
}
