//! JSON run configuration. Every object rejects unknown keys.

use std::path::{Path, PathBuf};

use gwp_core::dynamics::{
    FrameState, HagedornState, HamiltonianSpec, HellerState, IntegrationConfig, Monomial, Polynomial, ReducedState,
    Scheme,
};
use gwp_core::linalg::{self, real_json, ComplexMatrix, RealMatrix, RealVector};
use gwp_core::reduction::ComplexStructure;
use gwp_core::symplectic::{random_symplectic_with, seeded_rng, FrameMatrix};
use gwp_core::wavepacket::SpatialGrid;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub hbar: f64,
    pub hamiltonian: HamiltonianConfig,
    pub initial_state: InitialState,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub grid: Option<SpatialGrid>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    /// `|p|²/2m + ½ m ω² |q|²`.
    Harmonic {
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    Free {
        #[serde(default = "one")]
        mass: f64,
    },
    /// `|p|²/2m + V(q)` with `V` a table of monomials.
    Separable {
        #[serde(default = "one")]
        mass: f64,
        potential: Vec<Monomial>,
    },
    /// `½ zᵀKz + bᵀz + c` on phase space.
    Quadratic {
        #[serde(with = "real_json")]
        k: RealMatrix,
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Omitted `a`, `b` give the coherent width `A = 0`, `B = I`.
    Heller {
        q: Vec<f64>,
        p: Vec<f64>,
        #[serde(default, with = "opt_real")]
        a: Option<RealMatrix>,
        #[serde(default, with = "opt_real")]
        b: Option<RealMatrix>,
        #[serde(default)]
        phi: f64,
    },
    /// Omitted `big_q`, `big_p` give `Q = I`, `P = iI`.
    Hagedorn {
        q: Vec<f64>,
        p: Vec<f64>,
        #[serde(default, with = "opt_complex")]
        big_q: Option<ComplexMatrix>,
        #[serde(default, with = "opt_complex")]
        big_p: Option<ComplexMatrix>,
        #[serde(default)]
        s: f64,
    },
    /// Omitted `e` gives the identity frame; `random_frame` draws a
    /// symplectic frame from the run seed.
    Frame {
        z: Vec<f64>,
        #[serde(default, with = "opt_real")]
        e: Option<RealMatrix>,
        #[serde(default)]
        random_frame: bool,
    },
    /// Omitted `zeta` gives `−J`.
    Reduced {
        z: Vec<f64>,
        #[serde(default, with = "opt_real")]
        zeta: Option<RealMatrix>,
    },
}

impl InitialState {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialState::Heller { .. } => "heller",
            InitialState::Hagedorn { .. } => "hagedorn",
            InitialState::Frame { .. } => "frame",
            InitialState::Reduced { .. } => "reduced",
        }
    }
}

/// Integration settings; `hbar` lives at the top level of the run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub invariant_check_every: usize,
    pub project: bool,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let d = IntegrationConfig::default();
        IntegrationSection {
            dt: d.dt,
            t_final: d.t_final,
            scheme: d.scheme,
            invariant_check_every: d.invariant_check_every,
            project: d.project,
        }
    }
}

/// Output paths, resolved against the config file's directory when
/// relative.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub trajectory: PathBuf,
    pub diagnostics: PathBuf,
    /// Write every k-th recorded checkpoint to the trajectory CSV.
    pub checkpoint_stride: usize,
    /// Wave function CSVs are named `<prefix>_t<i>_<parametrization>.csv`.
    pub wavefunction_prefix: PathBuf,
    pub comparison: PathBuf,
    pub oracle_report: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            trajectory: "trajectory.csv".into(),
            diagnostics: "diagnostics.json".into(),
            checkpoint_stride: 1,
            wavefunction_prefix: "wavefunction".into(),
            comparison: "comparison.json".into(),
            oracle_report: "oracle_report.json".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Crank–Nicolson step.
    pub dt: f64,
    pub checkpoints: usize,
    /// Largest acceptable L² error.
    pub threshold: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            dt: 1e-4,
            checkpoints: 20,
            threshold: 5e-4,
        }
    }
}

mod opt_real {
    use gwp_core::linalg::{real_json, RealMatrix};
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<RealMatrix>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "real_json")] RealMatrix);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

mod opt_complex {
    use gwp_core::linalg::{complex_json, ComplexMatrix};
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ComplexMatrix>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "complex_json")] ComplexMatrix);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// A parsed config together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Parses a config, naming the offending key path on failure.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            inner.to_string()
        } else {
            format!("at '{path}': {inner}")
        }
    })
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn vector(x: &[f64], n: usize, what: &str) -> Result<RealVector, CliError> {
    if x.len() != n {
        return Err(CliError::Config(format!("{what} has length {}, expected {n}", x.len())));
    }
    Ok(RealVector::from_row_slice(x))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Config("n must be at least 1".into()));
        }
        self.integration().validate().map_err(config_err)?;
        let h = self.hamiltonian()?;
        if h.n() != self.n {
            return Err(CliError::Config(format!("hamiltonian acts in dimension {}, but n = {}", h.n(), self.n)));
        }
        if let Some(grid) = &self.grid {
            if self.n > 2 {
                return Err(CliError::Config("a grid is only supported for n ≤ 2".into()));
            }
            if grid.n() != self.n {
                return Err(CliError::Config(format!("grid has {} axes, but n = {}", grid.n(), self.n)));
            }
        }
        if self.outputs.checkpoint_stride == 0 {
            return Err(CliError::Config("outputs.checkpoint_stride must be at least 1".into()));
        }
        if let Some(o) = &self.oracle {
            if !(o.dt > 0.0 && o.threshold > 0.0 && o.checkpoints > 0) {
                return Err(CliError::Config("oracle dt, checkpoints and threshold must be positive".into()));
            }
        }
        self.initial()?;
        Ok(())
    }

    pub fn integration(&self) -> IntegrationConfig {
        let s = &self.integration;
        IntegrationConfig {
            dt: s.dt,
            t_final: s.t_final,
            scheme: s.scheme,
            hbar: self.hbar,
            invariant_check_every: s.invariant_check_every,
            project: s.project,
        }
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec, CliError> {
        let n = self.n;
        match &self.hamiltonian {
            HamiltonianConfig::Harmonic { mass, omega } => HamiltonianSpec::harmonic(n, *mass, *omega),
            HamiltonianConfig::Free { mass } => HamiltonianSpec::free(n, *mass),
            HamiltonianConfig::Separable { mass, potential } => {
                Polynomial::new(n, potential.clone()).and_then(|v| HamiltonianSpec::separable(*mass, v))
            }
            HamiltonianConfig::Quadratic { k, b, c } => {
                HamiltonianSpec::quadratic(k.clone(), RealVector::from_row_slice(b), *c)
            }
        }
        .map_err(|e| CliError::Config(format!("hamiltonian: {e}")))
    }

    /// The configured initial state in its own parametrization.
    pub fn initial(&self) -> Result<Initial, CliError> {
        let n = self.n;
        let wrap = |e: gwp_core::Error| CliError::Config(format!("initial_state: {e}"));
        Ok(match &self.initial_state {
            InitialState::Heller { q, p, a, b, phi } => {
                let a = a.clone().unwrap_or_else(|| RealMatrix::zeros(n, n));
                let b = b.clone().unwrap_or_else(|| RealMatrix::identity(n, n));
                Initial::Heller(
                    HellerState::new(vector(q, n, "q")?, vector(p, n, "p")?, a, b, *phi).map_err(wrap)?,
                )
            }
            InitialState::Hagedorn { q, p, big_q, big_p, s } => {
                let big_q = big_q.clone().unwrap_or_else(|| ComplexMatrix::identity(n, n));
                let big_p = big_p
                    .clone()
                    .unwrap_or_else(|| linalg::complexify(&RealMatrix::zeros(n, n), &RealMatrix::identity(n, n)));
                Initial::Hagedorn(
                    HagedornState::new(vector(q, n, "q")?, vector(p, n, "p")?, big_q, big_p, *s).map_err(wrap)?,
                )
            }
            InitialState::Frame { z, e, random_frame } => {
                let frame = match (e, random_frame) {
                    (Some(_), true) => {
                        return Err(CliError::Config("initial_state: give either e or random_frame, not both".into()))
                    }
                    (Some(m), false) => FrameMatrix::new(m.clone()).map_err(wrap)?,
                    (None, true) => random_symplectic_with(n, &mut seeded_rng(self.seed)),
                    (None, false) => FrameMatrix::identity(n).map_err(wrap)?,
                };
                Initial::Frame(FrameState::new(vector(z, 2 * n, "z")?, frame).map_err(wrap)?)
            }
            InitialState::Reduced { z, zeta } => {
                let zeta = match zeta {
                    Some(m) => ComplexStructure::new(m.clone()).map_err(wrap)?,
                    None => ComplexStructure::standard(n).map_err(wrap)?,
                };
                Initial::Reduced(ReducedState::new(vector(z, 2 * n, "z")?, zeta).map_err(wrap)?)
            }
        })
        .and_then(|s| {
            if s.n() == n {
                Ok(s)
            } else {
                Err(CliError::Config(format!("initial state has dimension {}, but n = {n}", s.n())))
            }
        })
    }

    pub fn require_grid(&self) -> Result<&SpatialGrid, CliError> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a 'grid' section".into()))
    }
}

#[derive(Debug, Clone)]
pub enum Initial {
    Heller(HellerState),
    Hagedorn(HagedornState),
    Frame(FrameState),
    Reduced(ReducedState),
}

impl Initial {
    pub fn n(&self) -> usize {
        match self {
            Initial::Heller(s) => s.n(),
            Initial::Hagedorn(s) => s.n(),
            Initial::Frame(s) => s.n(),
            Initial::Reduced(s) => s.n(),
        }
    }

    /// Hagedorn form of the initial wave packet. Frames must be symplectic
    /// and start with zero action; reduced states use the canonical
    /// section with zero phase.
    pub fn to_hagedorn(&self, hbar: f64) -> Result<HagedornState, CliError> {
        let r = match self {
            Initial::Hagedorn(s) => Ok(s.clone()),
            Initial::Heller(s) => HagedornState::from_heller(s),
            Initial::Frame(s) => FrameMatrix::symplectic(s.e.clone(), 1e-8)
                .and_then(|e| HagedornState::from_frame(&s.z, &e, 0.0)),
            Initial::Reduced(_) => HagedornState::from_heller(&self.to_heller(hbar)?),
        };
        r.map_err(|e| CliError::Config(format!("initial_state: no Hagedorn form: {e}")))
    }

    /// Heller form of the initial wave packet, with `φ = S − (ħ/2) arg det Q`.
    pub fn to_heller(&self, hbar: f64) -> Result<HellerState, CliError> {
        let r = match self {
            Initial::Heller(s) => Ok(s.clone()),
            Initial::Reduced(s) => s
                .complex_structure()
                .and_then(|zeta| gwp_core::reduction::siegel_from_complex_structure(&zeta))
                .and_then(|w| {
                    let n = s.n();
                    HellerState::from_siegel(s.z.rows(0, n).into_owned(), s.z.rows(n, n).into_owned(), &w, 0.0)
                }),
            _ => {
                let h = self.to_hagedorn(hbar)?;
                HellerState::from_hagedorn(&h, hbar, h.det_q().arg())
            }
        };
        r.map_err(|e| CliError::Config(format!("initial_state: no Heller form: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"n": 1, "hamiltonian": {"type": "free"}, "initial_state": {"type": "heller", "q": [0], "p": [1]}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.hbar, 1.0);
        assert_eq!(c.integration().scheme, Scheme::Rk4);
        assert_eq!(c.outputs.trajectory, PathBuf::from("trajectory.csv"));
        assert!(c.grid.is_none() && c.oracle.is_none());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse(&MINIMAL.replace("\"p\"", "\"pp\"")).unwrap_err();
        assert!(err.contains("initial_state") && err.contains("pp"), "{err}");
        let err = parse(&MINIMAL.replace("\"n\": 1", "\"n\": 1, \"extra\": 0")).unwrap_err();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn cross_field_checks() {
        let mut c = parse(MINIMAL).unwrap();
        c.n = 2;
        assert!(c.validate().is_err());
        let c = parse(&MINIMAL.replace("\"n\": 1", r#""n": 1, "grid": {"axes": [{"min": 0, "max": 1, "count": 16}, {"min": 0, "max": 1, "count": 16}]}"#)).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_frame_follows_the_seed() {
        let text = r#"{"n": 1, "seed": SEED, "hamiltonian": {"type": "free"}, "initial_state": {"type": "frame", "z": [0, 0], "random_frame": true}}"#;
        let frame = |seed: &str| match parse(&text.replace("SEED", seed)).unwrap().initial().unwrap() {
            Initial::Frame(f) => f.e,
            _ => unreachable!(),
        };
        assert_eq!(frame("5"), frame("5"));
        assert_ne!(frame("5"), frame("6"));
    }

    #[test]
    fn conversions_keep_the_packet() {
        let hbar = 0.5;
        let c = parse(MINIMAL).unwrap();
        let init = c.initial().unwrap();
        let hag = init.to_hagedorn(hbar).unwrap();
        let hel = init.to_heller(hbar).unwrap();
        assert!((hag.w_matrix().unwrap() - hel.w_matrix()).norm() < 1e-14);
    }
}
