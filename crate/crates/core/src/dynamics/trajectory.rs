//! Checkpointed trajectories and their CSV form.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::integrate::Evolvable;

/// Per-checkpoint invariants. `NaN` marks a quantity that is not defined
/// for the state type (Noether drift of Heller and reduced states).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `‖j_o(E(t)) − j_o(E(0))‖`.
    pub noether_drift: f64,
    pub constraint_residual: f64,
    /// `|H^ħ(t) − H^ħ(0)|` (reduced Hamiltonian for Heller and reduced states).
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<S> {
    pub step: usize,
    pub t: f64,
    pub state: S,
    pub diagnostics: Diagnostics,
    /// Unwrapped `arg det Q` for Hagedorn trajectories.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub checkpoints: Vec<Checkpoint<S>>,
    pub steps: usize,
}

/// Largest non-NaN value, or NaN if there is none.
fn nan_max(values: impl Iterator<Item = f64>) -> f64 {
    values.filter(|x| !x.is_nan()).fold(f64::NAN, f64::max)
}

pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl<S: Evolvable> Trajectory<S> {
    pub fn initial(&self) -> &Checkpoint<S> {
        &self.checkpoints[0]
    }

    pub fn last(&self) -> &Checkpoint<S> {
        self.checkpoints.last().expect("trajectory has at least the initial checkpoint")
    }

    pub fn final_state(&self) -> &S {
        &self.last().state
    }

    pub fn max_noether_drift(&self) -> f64 {
        nan_max(self.checkpoints.iter().map(|c| c.diagnostics.noether_drift))
    }

    pub fn max_constraint_residual(&self) -> f64 {
        nan_max(self.checkpoints.iter().map(|c| c.diagnostics.constraint_residual))
    }

    pub fn max_energy_drift(&self) -> f64 {
        nan_max(self.checkpoints.iter().map(|c| c.diagnostics.energy_drift))
    }

    pub fn csv_header(&self) -> Vec<String> {
        let n = self.initial().state.n();
        let mut cols = vec!["t".to_string()];
        cols.extend((0..n).map(|i| format!("q_{i}")));
        cols.extend((0..n).map(|i| format!("p_{i}")));
        cols.extend(S::block_headers(n));
        if self.initial().state.phase().is_some() {
            cols.push("phase".into());
        }
        cols.extend(["noether_drift", "constraint_residual", "energy_drift"].map(String::from));
        cols
    }

    /// Columns: `t, q_*, p_*, <state block>, [phase], noether_drift,
    /// constraint_residual, energy_drift`. Comma separated, LF endings,
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for c in &self.checkpoints {
            let mut row = vec![c.t];
            row.extend(c.state.z().iter());
            row.extend(c.state.block_values());
            row.extend(c.state.phase());
            row.extend([
                c.diagnostics.noether_drift,
                c.diagnostics.constraint_residual,
                c.diagnostics.energy_drift,
            ]);
            let line: Vec<String> = row.into_iter().map(fmt_float).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}
