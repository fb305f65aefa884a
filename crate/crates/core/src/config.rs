//! Experiment configuration: one JSON file fixes every resolution, tolerance
//! and seed used by the CLI and the acceptance suite.

use crate::error::{LabError, Result};
use crate::fields::DEFAULT_MARGIN;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).rev().map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid size for jump-field experiments.
    pub n: usize,
    /// Side length of the square domain.
    pub l: f64,
    /// Fraction of the side excluded on each edge.
    pub margin: f64,
    /// Mollification radii for the scaling probes.
    pub eps: Vec<f64>,
    /// Shifts for the increment and interaction curves.
    pub h: Vec<f64>,
    /// Besov scales `t`.
    pub besov_t: Vec<f64>,
    /// Grid size for the Besov estimator, which costs `O(N^2 t^2 / h^2)`.
    pub besov_n: usize,
    /// Refinement ladder for the kinetic and vortex experiments.
    pub ladder: Vec<usize>,
    /// Angular samples `M` for kinetic densities.
    pub angular_samples: usize,
    /// Angular cells for the direct interaction quadrature.
    pub delta_cells: usize,
    /// Harmonic cutoff `K` of the entropy dictionary (modes up to `2K`).
    pub dictionary_k: usize,
    /// Random polynomials added to the dictionary.
    pub dictionary_random: usize,
    pub coercivity_samples: usize,
    pub cost_samples: usize,
    pub quartic_pairs: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: OutputPaths,
}

/// Pass bands of the acceptance checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub xi_exact: f64,
    pub delta_quadrature_rel: f64,
    pub coercivity_limit_rel: f64,
    pub coercivity_endpoint: f64,
    pub exponent: f64,
    pub probe_exponent: f64,
    pub coefficient: f64,
    pub entropy_defect: f64,
    pub production_rel: f64,
    pub cost_abs: f64,
    pub cost_asymptotic_rel: f64,
    pub pairing_identity: f64,
    pub sigma_l1: f64,
    pub kinetic_ratio: f64,
    pub low_mode: f64,
    pub vortex_ratio: f64,
    pub quartic_rel: f64,
    pub besov_flatness: f64,
    pub besov_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            xi_exact: 1e-12,
            delta_quadrature_rel: 1e-3,
            coercivity_limit_rel: 0.01,
            coercivity_endpoint: 1e-10,
            exponent: 0.1,
            probe_exponent: 0.15,
            coefficient: 1e-10,
            entropy_defect: 1e-8,
            production_rel: 0.05,
            cost_abs: 1e-3,
            cost_asymptotic_rel: 0.02,
            pairing_identity: 1e-6,
            sigma_l1: 1e-3,
            kinetic_ratio: 1.7,
            low_mode: 1e-10,
            vortex_ratio: 1.5,
            quartic_rel: 5e-4,
            besov_flatness: 1.3,
            besov_exponent: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub report: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            dir: PathBuf::from("out"),
            report: "report.json".into(),
        }
    }
}

impl OutputPaths {
    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 1024,
            l: 1.0,
            margin: DEFAULT_MARGIN,
            eps: dyadic(4, 7),
            h: dyadic(4, 7),
            besov_t: dyadic(4, 7),
            besov_n: 512,
            ladder: vec![128, 256, 512],
            angular_samples: 4096,
            delta_cells: 2048,
            dictionary_k: 3,
            dictionary_random: 4,
            coercivity_samples: 10_000,
            cost_samples: 100,
            quartic_pairs: 1_000_000,
            seed: 20_241_014,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
        }
    }
}

fn bad(msg: String) -> LabError {
    LabError::Config(msg)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Grid spacing of the main grid.
    pub fn cell(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Schema-level checks plus the resolution preconditions of every
    /// operation the suite invokes. Structural problems are `Config` errors,
    /// scales the grid cannot resolve are `Resolution` errors.
    pub fn validate(&self) -> Result<()> {
        self.validate_schema()?;
        self.validate_resolution()
    }

    /// Structural checks only: list lengths, positivity, sample minimums.
    pub fn validate_schema(&self) -> Result<()> {
        if self.n < 64 {
            return Err(bad(format!("n = {} is below 64", self.n)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(bad(format!("l = {} must be positive", self.l)));
        }
        if !(0.0..0.4).contains(&self.margin) {
            return Err(bad(format!("margin {} outside [0, 0.4)", self.margin)));
        }
        for (name, list) in [("eps", &self.eps), ("h", &self.h), ("besov_t", &self.besov_t)] {
            if list.len() < 3 {
                return Err(bad(format!("{name} needs at least 3 entries for a fit")));
            }
            if list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(bad(format!("{name} entries must be positive")));
            }
        }
        if self.ladder.len() < 2 || self.ladder.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(bad("ladder must be at least two successive doublings".into()));
        }
        let minimums = [
            ("angular_samples", self.angular_samples, 256),
            ("delta_cells", self.delta_cells, 256),
            ("coercivity_samples", self.coercivity_samples, 100),
            ("cost_samples", self.cost_samples, 2),
            ("quartic_pairs", self.quartic_pairs, 10_000),
            ("dictionary_k", self.dictionary_k, 1),
            ("besov_n", self.besov_n, 64),
        ];
        for (name, v, min) in minimums {
            if v < min {
                return Err(bad(format!("{name} = {v} is below {min}")));
            }
        }
        Ok(())
    }

    /// Every scale is resolvable on its grid.
    pub fn validate_resolution(&self) -> Result<()> {
        let h = self.cell();
        let min_eps = self.eps.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eps < 2.0 * h * (1.0 - 1e-12) {
            return Err(LabError::Resolution(format!(
                "eps = {min_eps} is below two cells at n = {}",
                self.n
            )));
        }
        for &v in &self.h {
            let cells = v / h;
            if cells < 2.0 - 1e-9 || (cells - cells.round()).abs() > 1e-6 {
                return Err(LabError::Resolution(format!(
                    "shift {v} is not a whole number (>= 2) of cells at n = {}",
                    self.n
                )));
            }
        }
        let hb = self.l / self.besov_n as f64;
        for &t in &self.besov_t {
            if t < 2.0 * hb * (1.0 - 1e-12) || t > self.l / 4.0 {
                return Err(LabError::Resolution(format!(
                    "Besov scale {t} outside [2h, L/4] at n = {}",
                    self.besov_n
                )));
            }
        }
        if self.ladder[0] < 32 {
            return Err(LabError::Resolution("ladder starts below n = 32".into()));
        }
        Ok(())
    }
}
