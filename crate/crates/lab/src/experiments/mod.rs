//! The experiments. Each takes a config and returns a [`ResultTable`] whose
//! assertions decide the exit status of the CLI.

mod consistency;
mod lemmas;
mod theorems;

use std::time::Instant;

use mosaic_core::grassmann::delta;
use mosaic_core::minkowski::blaschke_body;
use mosaic_core::process::{section_params, FaceSampler};
use mosaic_core::shape::deviation_cross_space;
use mosaic_core::{Error, Polytope};

pub use consistency::run_consistency;
pub use lemmas::{run_lemma1_check, run_lemma6_rate};
pub use theorems::{run_limit_shape_demo, run_theorem1, run_theorem2};

use crate::{Experiment, ExperimentConfig, LabError, ResultTable, Result};

/// Stream tags separating the random inputs of different experiment parts.
mod tag {
    pub const THEOREM1: u64 = 1;
    pub const THEOREM2_WINDOWS: u64 = 2;
    pub const THEOREM2_PROCESS: u64 = 3;
    pub const LEMMA1: u64 = 4;
    pub const LEMMA6: u64 = 5;
    pub const LEMMA6_DOUBLED: u64 = 6;
    pub const LIMIT_SHAPE: u64 = 7;
    pub const CONSISTENCY_PROCESS: u64 = 8;
    pub const CONSISTENCY_WINDOWS: u64 = 9;
}

/// Runs `e` and stamps the table with seed, config hash and wall time.
pub fn run(e: Experiment, cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let start = Instant::now();
    let mut table = match e {
        Experiment::Theorem1 => run_theorem1(cfg),
        Experiment::Theorem2 => run_theorem2(cfg),
        Experiment::Lemma1 => run_lemma1_check(cfg),
        Experiment::Lemma6 => run_lemma6_rate(cfg),
        Experiment::Limitshape => run_limit_shape_demo(cfg),
        Experiment::Consistency => run_consistency(cfg),
    }?;
    table.metadata.seed = cfg.seed;
    table.metadata.config_hash = cfg.hash();
    table.metadata.wall_time_s = start.elapsed().as_secs_f64();
    Ok(table)
}

/// `τ = k·V_k(B)^{1−1/k}`.
pub fn tau(b: &Polytope) -> f64 {
    let k = b.dim() as f64;
    k * b.volume().powf(1.0 - 1.0 / k)
}

/// Face sampler together with the reference direction `L*`, its Blaschke
/// body and the Grassmannian distance of every flat in the support to `L*`.
pub(crate) struct Target {
    pub sampler: FaceSampler,
    pub body: Polytope,
    pub flat_delta: Vec<f64>,
    pub gamma_section: f64,
    pub tau: f64,
}

impl Target {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let sampler = FaceSampler::new(&cfg.spec, cfg.k)?;
        if !sampler.flats.contains(&cfg.l_star) {
            return Err(Error::NotInSupport.into());
        }
        let body = blaschke_body(&cfg.spec, &cfg.l_star)?;
        let flat_delta =
            sampler.flats.entries.iter().map(|(l, _)| delta(l, &cfg.l_star)).collect::<mosaic_core::Result<_>>()?;
        let gamma_section = section_params(&cfg.spec, &cfg.l_star)?.gamma_section;
        let tau = tau(&body);
        Ok(Self { sampler, body, flat_delta, gamma_section, tau })
    }

    /// `ϑ(face, B_{L*})`.
    pub fn deviation(&self, face: &Polytope) -> Result<f64> {
        Ok(deviation_cross_space(face, &self.body)?.value)
    }
}

/// Collects replica results, failing on the first error in replica order.
pub(crate) fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

fn require_arrangement(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.spec.dim() != 3 || cfg.k != 2 {
        return Err(LabError::Config("the arrangement route needs d = 3 and k = 2".into()));
    }
    Ok(())
}
