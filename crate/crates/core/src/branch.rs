//! Continuous branch of `arg det Q` along a trajectory.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symplectic::DEGENERACY_THRESHOLD;

/// Unwrapped argument of `det Q(t)`, updated in steps of less than π/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTracker {
    theta: f64,
    last_det: Complex64,
}

fn check_det(det: Complex64) -> Result<()> {
    if !(det.re.is_finite() && det.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if det.norm() <= DEGENERACY_THRESHOLD {
        return Err(Error::Singular("det Q"));
    }
    Ok(())
}

impl BranchTracker {
    /// Starts on the principal branch.
    pub fn new(det_q: Complex64) -> Result<Self> {
        check_det(det_q)?;
        Ok(BranchTracker {
            theta: det_q.arg(),
            last_det: det_q,
        })
    }

    /// Starts at a prescribed value of the unwrapped argument.
    pub fn with_theta(det_q: Complex64, theta: f64) -> Result<Self> {
        check_det(det_q)?;
        let tracker = BranchTracker { theta, last_det: det_q };
        tracker.check_sync()?;
        Ok(tracker)
    }

    pub fn update(&mut self, det_q: Complex64) -> Result<f64> {
        check_det(det_q)?;
        let delta = (det_q / self.last_det).arg();
        if delta.abs() >= FRAC_PI_2 {
            return Err(Error::BranchJump { delta });
        }
        self.theta += delta;
        self.last_det = det_q;
        Ok(self.theta)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn last_det(&self) -> Complex64 {
        self.last_det
    }

    fn check_sync(&self) -> Result<()> {
        let diff = self.theta - self.last_det.arg();
        let mismatch = (diff - 2.0 * PI * (diff / (2.0 * PI)).round()).abs();
        if mismatch > 1e-6 {
            return Err(Error::BranchMismatch { mismatch });
        }
        Ok(())
    }

    /// `(det Q)^{-1/2} = |det Q|^{-1/2} e^{-iθ/2}` for the determinant the
    /// tracker was last updated with.
    pub fn inv_sqrt_det(&self, det_q: Complex64) -> Result<Complex64> {
        check_det(det_q)?;
        let rel = (det_q - self.last_det).norm() / self.last_det.norm();
        if rel > 1e-8 {
            return Err(Error::BranchMismatch { mismatch: rel });
        }
        Ok(Complex64::from_polar(det_q.norm().powf(-0.5), -0.5 * self.theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn unwraps_full_turn() {
        let mut tracker = BranchTracker::new(Complex64::new(1.0, 0.0)).unwrap();
        let steps = 1000;
        for k in 1..=steps {
            let t = TAU * k as f64 / steps as f64;
            tracker.update(Complex64::from_polar(1.0, t)).unwrap();
        }
        assert!((tracker.theta() - TAU).abs() < 1e-12);
        let root = tracker.inv_sqrt_det(Complex64::from_polar(1.0, TAU)).unwrap();
        assert!((root - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_large_jumps_and_singular_values() {
        let mut tracker = BranchTracker::new(Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(tracker.update(Complex64::new(-1.0, 0.1)), Err(Error::BranchJump { .. })));
        assert!(tracker.update(Complex64::new(0.0, 0.0)).is_err());
        assert!(BranchTracker::new(Complex64::new(1e-13, 0.0)).is_err());
    }

    #[test]
    fn prescribed_theta_must_match_det() {
        assert!(BranchTracker::with_theta(Complex64::new(1.0, 0.0), TAU).is_ok());
        assert!(BranchTracker::with_theta(Complex64::new(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn stale_determinant_is_rejected() {
        let tracker = BranchTracker::new(Complex64::new(1.0, 0.0)).unwrap();
        assert!(tracker.inv_sqrt_det(Complex64::new(0.0, 1.0)).is_err());
    }
}
