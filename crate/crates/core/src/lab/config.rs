use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certify::{DEFAULT_FRAC_THRESHOLD, DEFAULT_GRID_N, DEFAULT_REL_GAP, DEFAULT_SEP_TOL, DEFAULT_ZERO_TOL};
use crate::cocycle::{GroupTag, MapSpec, TrigPoly};
use crate::error::{LabError, Result};
use crate::holonomy::{DEFAULT_N_PULLBACK, DEFAULT_RESIDUAL_TOL};
use crate::lyapunov::DEFAULT_QR_PERIOD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Lyapunov,
    Certify,
    SweepEnergy,
    Continuity,
    PerturbSearch,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::Certify => "certify",
            ExperimentKind::SweepEnergy => "sweep-energy",
            ExperimentKind::Continuity => "continuity",
            ExperimentKind::PerturbSearch => "perturb-search",
        }
    }
}

/// Energies `min, …, max` on `steps` equally spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl EnergyRange {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + i as f64 * h
                }
            })
            .collect()
    }
}

/// Perturbation direction `B` applied to the map of `symbol`, in the
/// coefficient layout of cocycle files. `B` need not be invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    #[serde(default)]
    pub symbol: usize,
    pub degree: usize,
    pub coeffs: Vec<Vec<f64>>,
}

impl Direction {
    pub fn entries(&self, d: usize) -> Result<Vec<TrigPoly>> {
        MapSpec {
            group_tag: GroupTag::General,
            degree: self.degree,
            coeffs: self.coeffs.clone(),
        }
        .entries(d)
    }
}

fn d_n_iter() -> usize {
    100_000
}
fn d_n_rep() -> usize {
    8
}
fn d_qr_period() -> usize {
    DEFAULT_QR_PERIOD
}
fn d_grid_n() -> usize {
    DEFAULT_GRID_N
}
fn d_zero_tol() -> f64 {
    DEFAULT_ZERO_TOL
}
fn d_n_samples() -> usize {
    1000
}
fn d_sep_tol() -> f64 {
    DEFAULT_SEP_TOL
}
fn d_frac_threshold() -> f64 {
    DEFAULT_FRAC_THRESHOLD
}
fn d_n_pullback() -> usize {
    DEFAULT_N_PULLBACK
}
fn d_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}
fn d_rel_gap() -> f64 {
    DEFAULT_REL_GAP
}
fn d_budget() -> f64 {
    0.1
}
fn d_max_trials() -> usize {
    64
}

/// One experiment, read from JSON. The cocycle path is resolved relative to
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub cocycle: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "d_n_iter")]
    pub n_iter: usize,
    #[serde(default = "d_n_rep")]
    pub n_rep: usize,
    #[serde(default = "d_qr_period")]
    pub qr_period: usize,
    #[serde(default = "d_grid_n")]
    pub grid_n: usize,
    #[serde(default = "d_zero_tol")]
    pub zero_tol: f64,
    #[serde(default = "d_n_samples")]
    pub n_samples: usize,
    #[serde(default = "d_sep_tol")]
    pub sep_tol: f64,
    #[serde(default = "d_frac_threshold")]
    pub frac_threshold: f64,
    #[serde(default = "d_n_pullback")]
    pub n_pullback: usize,
    #[serde(default = "d_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "d_rel_gap")]
    pub rel_gap: f64,
    #[serde(default)]
    pub energy: Option<EnergyRange>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub direction: Option<Direction>,
    /// Bound on the perturbation parameter in perturb-search.
    #[serde(default = "d_budget")]
    pub budget: f64,
    #[serde(default = "d_max_trials")]
    pub max_trials: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LabError::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

fn nonzero(name: &str, n: usize) -> Result<()> {
    if n > 0 {
        Ok(())
    } else {
        Err(LabError::Config(format!("{name} must be at least 1")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// A config with defaults for every knob.
    pub fn with_cocycle(path: impl Into<PathBuf>) -> Self {
        serde_json::from_value(serde_json::json!({ "cocycle": path.into() })).expect("defaults deserialize")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_iter", self.n_iter),
            ("n_rep", self.n_rep),
            ("qr_period", self.qr_period),
            ("grid_n", self.grid_n),
            ("n_samples", self.n_samples),
            ("n_pullback", self.n_pullback),
            ("max_trials", self.max_trials),
        ] {
            nonzero(name, n)?;
        }
        if self.grid_n < 8 {
            return Err(LabError::Config("grid_n must be at least 8".into()));
        }
        for (name, x) in [
            ("zero_tol", self.zero_tol),
            ("sep_tol", self.sep_tol),
            ("frac_threshold", self.frac_threshold),
            ("residual_tol", self.residual_tol),
            ("rel_gap", self.rel_gap),
            ("budget", self.budget),
        ] {
            positive(name, x)?;
        }
        if let Some(e) = &self.energy {
            nonzero("energy.steps", e.steps)?;
            if !(e.min.is_finite() && e.max.is_finite() && e.min <= e.max) {
                return Err(LabError::Config(format!("empty energy range [{}, {}]", e.min, e.max)));
            }
        }
        if let Some(eps) = &self.epsilons {
            if eps.is_empty() {
                return Err(LabError::Config("epsilons must not be empty".into()));
            }
            for &x in eps {
                positive("epsilon", x)?;
            }
        }
        Ok(())
    }

    /// The seed from the command line if given, else from the config.
    pub fn resolve_seed(&self, cli: Option<u64>) -> Result<u64> {
        cli.or(self.seed)
            .ok_or_else(|| LabError::Config("no seed given (set \"seed\" or pass --seed)".into()))
    }

    pub fn cocycle_path(&self, config_dir: &Path) -> PathBuf {
        if self.cocycle.is_absolute() {
            self.cocycle.clone()
        } else {
            config_dir.join(&self.cocycle)
        }
    }
}
