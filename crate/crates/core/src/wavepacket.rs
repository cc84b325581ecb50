//! Grid evaluation of Heller and Hagedorn Gaussian wave packets.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use crate::branch::BranchTracker;
use crate::dynamics::state::{HagedornState, HellerState};
use crate::dynamics::trajectory::fmt_float;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RealVector};

pub const MAX_GRID_POINTS: usize = 1 << 22;
pub const MIN_AXIS_POINTS: usize = 16;
/// Largest admissible `|ψ|` on the grid boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }
}

/// Uniform tensor grid in one or two dimensions, endpoints included.
/// Points are ordered with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct SpatialGrid {
    axes: Vec<GridAxis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    axes: Vec<GridAxis>,
}

impl TryFrom<GridSpec> for SpatialGrid {
    type Error = Error;
    fn try_from(spec: GridSpec) -> Result<Self> {
        SpatialGrid::new(spec.axes)
    }
}

impl From<SpatialGrid> for GridSpec {
    fn from(g: SpatialGrid) -> Self {
        GridSpec { axes: g.axes }
    }
}

impl SpatialGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Unsupported(format!("grids of dimension {} (only 1 and 2)", axes.len())));
        }
        let mut total: usize = 1;
        for ax in &axes {
            if !(ax.min.is_finite() && ax.max.is_finite() && ax.max > ax.min) {
                return Err(Error::Invalid(format!("grid axis needs finite max > min, got [{}, {}]", ax.min, ax.max)));
            }
            if ax.count < MIN_AXIS_POINTS {
                return Err(Error::Invalid(format!("grid axis needs at least {MIN_AXIS_POINTS} points, got {}", ax.count)));
            }
            total = total.saturating_mul(ax.count);
        }
        if total > MAX_GRID_POINTS {
            return Err(Error::Invalid(format!("grid has {total} points, limit is {MAX_GRID_POINTS}")));
        }
        Ok(SpatialGrid { axes })
    }

    pub fn uniform_1d(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(vec![GridAxis { min, max, count }])
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn multi_index(&self, mut k: usize) -> [usize; 2] {
        let mut idx = [0; 2];
        for (d, ax) in self.axes.iter().enumerate().rev() {
            idx[d] = k % ax.count;
            k /= ax.count;
        }
        idx
    }

    pub fn point(&self, k: usize) -> RealVector {
        let idx = self.multi_index(k);
        RealVector::from_fn(self.n(), |d, _| self.axes[d].point(idx[d]))
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let idx = self.multi_index(k);
        self.axes.iter().enumerate().any(|(d, ax)| idx[d] == 0 || idx[d] + 1 == ax.count)
    }

    /// Trapezoidal quadrature weight of point `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let idx = self.multi_index(k);
        self.axes
            .iter()
            .enumerate()
            .map(|(d, ax)| {
                let h = ax.spacing();
                if idx[d] == 0 || idx[d] + 1 == ax.count {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dims(grid.len(), values.len()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(WaveField { grid, values })
    }

    pub fn from_fn(grid: &SpatialGrid, f: impl Fn(&RealVector) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn boundary_max(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.grid.is_boundary(k))
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max)
    }

    /// Fails when the field has not decayed to `tol` at the grid edges.
    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        let magnitude = self.boundary_max();
        if magnitude > tol {
            return Err(Error::BoundaryMass { step: 0, magnitude, tol });
        }
        Ok(())
    }

    /// Columns `x` (or `x_0,x_1`), `re`, `im`, `abs2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.grid.n() == 1 {
            out.push_str("x,re,im,abs2\n");
        } else {
            out.push_str("x_0,x_1,re,im,abs2\n");
        }
        for (k, v) in self.values.iter().enumerate() {
            let mut row: Vec<f64> = self.grid.point(k).iter().copied().collect();
            row.extend([v.re, v.im, v.norm_sqr()]);
            let line: Vec<String> = row.into_iter().map(fmt_float).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

fn check_grid_dim(grid: &SpatialGrid, n: usize) -> Result<()> {
    if grid.n() != n {
        return Err(Error::GridMismatch(format!("state dimension {n}, grid dimension {}", grid.n())));
    }
    Ok(())
}

/// `prefactor · exp{(i/ħ)[½(x−q)ᵀW(x−q) + pᵀ(x−q) + phase]}` on the grid.
fn gaussian(
    grid: &SpatialGrid,
    q: &RealVector,
    p: &RealVector,
    w: &ComplexMatrix,
    phase: f64,
    prefactor: Complex64,
    hbar: f64,
) -> Result<WaveField> {
    let i_over_hbar = Complex64::new(0.0, 1.0 / hbar);
    WaveField::from_fn(grid, |x| {
        let dx = x - q;
        let mut quad = Complex64::new(0.0, 0.0);
        for i in 0..dx.len() {
            for j in 0..dx.len() {
                quad += w[(i, j)] * (dx[i] * dx[j]);
            }
        }
        let arg = quad * 0.5 + p.dot(&dx) + phase;
        prefactor * (i_over_hbar * arg).exp()
    })
}

/// `(det B/(πħ)^n)^{1/4} exp{(i/ħ)[½(x−q)ᵀ(A+iB)(x−q) + pᵀ(x−q) + φ]}`.
pub fn eval_heller(state: &HellerState, grid: &SpatialGrid, hbar: f64) -> Result<WaveField> {
    check_hbar(hbar)?;
    check_grid_dim(grid, state.n())?;
    let w = state.siegel()?;
    let n = state.n() as i32;
    let det_b = w.b().determinant();
    let prefactor = (det_b / (PI * hbar).powi(n)).powf(0.25);
    gaussian(grid, &state.q, &state.p, w.matrix(), state.phi, Complex64::new(prefactor, 0.0), hbar)
}

/// `(πħ)^{-n/4} (det Q)^{-1/2} exp{(i/ħ)[½(x−q)ᵀPQ^{-1}(x−q) + pᵀ(x−q) + S]}`,
/// with the square root taken on the branch carried by `branch`.
pub fn eval_hagedorn(
    state: &HagedornState,
    grid: &SpatialGrid,
    hbar: f64,
    branch: &BranchTracker,
) -> Result<WaveField> {
    check_hbar(hbar)?;
    check_grid_dim(grid, state.n())?;
    let root = branch.inv_sqrt_det(state.det_q())?;
    let w = state.w_matrix()?;
    let prefactor = root * (PI * hbar).powf(-(state.n() as f64) / 4.0);
    gaussian(grid, &state.q, &state.p, &w, state.s, prefactor, hbar)
}

fn trapezoid(grid: &SpatialGrid, density: impl Fn(usize) -> f64) -> f64 {
    (0..grid.len()).map(|k| grid.weight(k) * density(k)).sum()
}

pub fn l2_norm(field: &WaveField) -> f64 {
    trapezoid(&field.grid, |k| field.values[k].norm_sqr()).sqrt()
}

pub fn l2_distance(f1: &WaveField, f2: &WaveField) -> Result<f64> {
    if f1.grid != f2.grid {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    Ok(trapezoid(&f1.grid, |k| (f1.values[k] - f2.values[k]).norm_sqr()).sqrt())
}

pub fn compare_parametrizations(
    heller: &HellerState,
    hagedorn: &HagedornState,
    grid: &SpatialGrid,
    hbar: f64,
    branch: &BranchTracker,
) -> Result<f64> {
    l2_distance(&eval_heller(heller, grid, hbar)?, &eval_hagedorn(hagedorn, grid, hbar, branch)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;

    fn v(x: &[f64]) -> RealVector {
        RealVector::from_row_slice(x)
    }

    fn grid() -> SpatialGrid {
        SpatialGrid::uniform_1d(-10.0, 10.0, 4096).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::uniform_1d(1.0, 0.0, 32).is_err());
        assert!(SpatialGrid::uniform_1d(0.0, 1.0, 15).is_err());
        let big = GridAxis { min: 0.0, max: 1.0, count: 4096 };
        assert!(SpatialGrid::new(vec![big, GridAxis { count: 2048, ..big }]).is_err());
        assert!(SpatialGrid::new(vec![big; 3]).is_err());
        let g: std::result::Result<SpatialGrid, _> =
            serde_json::from_str(r#"{"axes":[{"min":0,"max":1,"count":4}]}"#);
        assert!(g.is_err());
    }

    #[test]
    fn coherent_heller_values() {
        let s = HellerState::coherent(v(&[0.0]), v(&[0.0])).unwrap();
        let f = eval_heller(&s, &grid(), 1.0).unwrap();
        let c = PI.powf(-0.25);
        for k in (0..4096).step_by(97) {
            let x = grid().point(k)[0];
            assert!((f.values()[k].norm() - c * (-0.5 * x * x).exp()).abs() < 1e-15);
        }
        assert!((l2_norm(&f) - 1.0).abs() < 1e-10);
        assert!(f.boundary_max() < BOUNDARY_TOL);
    }

    #[test]
    fn peak_value_at_centre() {
        let g = SpatialGrid::uniform_1d(-10.0, 10.0, 201).unwrap();
        let s = HellerState::coherent(v(&[0.0]), v(&[0.0])).unwrap();
        let f = eval_heller(&s, &g, 1.0).unwrap();
        assert!((f.values()[100] - Complex64::new(PI.powf(-0.25), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coherent_hagedorn_matches_heller() {
        let h = HagedornState::coherent(v(&[0.5]), v(&[-1.0])).unwrap();
        let tr = BranchTracker::new(h.det_q()).unwrap();
        let heller = HellerState::from_hagedorn(&h, 1.0, tr.theta()).unwrap();
        let d = compare_parametrizations(&heller, &h, &grid(), 1.0, &tr).unwrap();
        assert!(d < 1e-12);
        let f = eval_hagedorn(&h, &grid(), 1.0, &tr).unwrap();
        assert!((l2_norm(&f) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_mismatch_is_detected() {
        let h = HagedornState::coherent(v(&[0.0]), v(&[0.0])).unwrap();
        let tr = BranchTracker::new(h.det_q()).unwrap();
        let mut heller = HellerState::from_hagedorn(&h, 1.0, 0.0).unwrap();
        heller.phi += PI;
        let d = compare_parametrizations(&heller, &h, &grid(), 1.0, &tr).unwrap();
        assert!((d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn distance_properties() {
        let s = HellerState::coherent(v(&[-5.0]), v(&[0.0])).unwrap();
        let t = HellerState::coherent(v(&[5.0]), v(&[0.0])).unwrap();
        let g = SpatialGrid::uniform_1d(-20.0, 20.0, 4001).unwrap();
        let f1 = eval_heller(&s, &g, 0.1).unwrap();
        let f2 = eval_heller(&t, &g, 0.1).unwrap();
        assert_eq!(l2_distance(&f1, &f1).unwrap(), 0.0);
        let expected = (l2_norm(&f1).powi(2) + l2_norm(&f2).powi(2)).sqrt();
        assert!((l2_distance(&f1, &f2).unwrap() - expected).abs() < 1e-12);
        let other = eval_heller(&s, &grid(), 0.1).unwrap();
        assert!(matches!(l2_distance(&f1, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn two_dimensional_norm() {
        let axis = GridAxis { min: -8.0, max: 8.0, count: 257 };
        let g = SpatialGrid::new(vec![axis, axis]).unwrap();
        let a = RealMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, -0.3]);
        let b = RealMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]);
        let s = HellerState::new(v(&[0.3, -0.2]), v(&[1.0, 0.5]), a, b, 0.7).unwrap();
        let f = eval_heller(&s, &g, 1.0).unwrap();
        assert!((l2_norm(&f) - 1.0).abs() < 1e-10);
        let h = HagedornState::from_heller(&s).unwrap();
        let tr = BranchTracker::new(h.det_q()).unwrap();
        assert!(compare_parametrizations(&s, &h, &g, 1.0, &tr).unwrap() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let g = SpatialGrid::uniform_1d(-1.0, 1.0, 16).unwrap();
        let s = HellerState::coherent(v(&[0.0]), v(&[0.0])).unwrap();
        let csv = eval_heller(&s, &g, 1.0).unwrap().to_csv();
        assert!(csv.starts_with("x,re,im,abs2\n-1.0000000000000000e0,"));
        assert_eq!(csv.lines().count(), 17);
    }
}
