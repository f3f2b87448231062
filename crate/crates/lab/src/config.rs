//! Experiment configuration, read from JSON with per-experiment defaults.

use std::path::Path;

use mosaic_core::{ProcessSpec, SphericalMeasure, Subspace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{LabError, Result};

/// The experiments the runner knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Theorem1,
    Theorem2,
    Lemma1,
    Lemma6,
    Limitshape,
    Consistency,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Theorem1 => "theorem1",
            Experiment::Theorem2 => "theorem2",
            Experiment::Lemma1 => "lemma1",
            Experiment::Lemma6 => "lemma6",
            Experiment::Limitshape => "limitshape",
            Experiment::Consistency => "consistency",
        }
    }
}

/// One stage of the limit-shape schedule: condition on `V_k ≥ a` and
/// `Δ(D, L*) < θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub a: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: ProcessSpec,
    /// Face dimension.
    pub k: usize,
    pub l_star: Subspace,
    pub epsilon: f64,
    pub theta: f64,
    pub a_grid: Vec<f64>,
    /// Relative bin width of the interval conditioning `V_k ∈ a(1, 1 + h)`.
    pub h: f64,
    /// Raw samples (or instances, for the deterministic sweep).
    pub replicas: usize,
    pub seed: u64,
    /// Half-width of the arrangement window `[−W, W]³`.
    pub window: f64,
    /// Number of independent arrangement windows.
    pub windows: usize,
    pub schedule: Vec<Stage>,
    /// Largest rotation defect in the deterministic sweep.
    pub max_defect: f64,
    /// Directory for tables and plots.
    pub out_dir: Option<String>,
}

/// Cross measure with intensity 3: sections by coordinate planes are
/// rectangular with unit mean typical area.
fn cross_spec() -> ProcessSpec {
    ProcessSpec::new(3.0, SphericalMeasure::cross(3)).expect("cross measure is valid")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            spec: cross_spec(),
            k: 2,
            l_star: Subspace::coordinate(3, &[0, 1]).expect("valid axes"),
            epsilon: 0.3,
            theta: 0.05,
            a_grid: vec![1.0, 2.0, 4.0, 8.0],
            h: 0.25,
            replicas: 100_000,
            seed: 1,
            window: 6.0,
            windows: 100,
            schedule: vec![
                Stage { a: 0.0, theta: 0.5 },
                Stage { a: 2.0, theta: 0.2 },
                Stage { a: 4.0, theta: 0.1 },
                Stage { a: 8.0, theta: 0.05 },
            ],
            max_defect: 0.125,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults tuned to each experiment.
    pub fn for_experiment(e: Experiment) -> Self {
        let base = Self::default();
        match e {
            // bins far enough in the tail for the exponential rate to show,
            // with at least ~20 expected hits per bin at 10⁵ samples
            Experiment::Lemma6 => Self { a_grid: vec![16.0, 24.0, 32.0, 48.0], ..base },
            Experiment::Lemma1 => Self { replicas: 200, ..base },
            Experiment::Theorem2 => Self { replicas: 50_000, windows: 200, ..base },
            Experiment::Consistency => Self { replicas: 20_000, ..base },
            _ => base,
        }
    }

    /// Reads a possibly partial config; missing fields take the defaults of
    /// experiment `e`.
    pub fn load_for(path: &Path, e: Experiment) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
        Self::from_json_for(&text, e)
    }

    pub fn from_json_for(text: &str, e: Experiment) -> Result<Self> {
        let overrides: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(overrides) = overrides else {
            return Err(LabError::Config("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::for_experiment(e))?;
        if let serde_json::Value::Object(base) = &mut merged {
            base.extend(overrides);
        }
        let cfg: Self = serde_json::from_value(merged)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        let d = self.spec.dim();
        if self.l_star.ambient_dim() != d || self.l_star.dim() != self.k {
            return bad(format!("l_star must be a {}-dimensional subspace of R^{d}", self.k));
        }
        if !(1..d).contains(&self.k) {
            return bad(format!("k must lie in 1..{d}, got {}", self.k));
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if !(self.theta > 0.0) {
            return bad("theta must be positive".into());
        }
        if self.a_grid.is_empty() || self.a_grid.windows(2).any(|w| !(w[0] < w[1])) || self.a_grid[0] <= 0.0 {
            return bad("a_grid must be positive and strictly increasing".into());
        }
        if !(self.h > 0.0 && self.h < 0.5) {
            return bad(format!("h must lie in (0, 1/2), got {}", self.h));
        }
        if self.replicas == 0 || self.windows == 0 {
            return bad("replicas and windows must be positive".into());
        }
        if !(self.window > 0.0) {
            return bad("window must be positive".into());
        }
        if self.schedule.iter().any(|s| !(s.theta > 0.0) || s.a < 0.0) {
            return bad("schedule stages need a ≥ 0 and theta > 0".into());
        }
        if !(self.max_defect > 0.0 && self.max_defect <= 0.125) {
            return bad("max_defect must lie in (0, 1/8]".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let canonical = Self { out_dir: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
