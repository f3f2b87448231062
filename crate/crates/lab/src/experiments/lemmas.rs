//! The deterministic projection inequality under small rotations and the
//! exponential decay rate of section-cell volumes.

use mosaic_core::grassmann::minimal_rotation;
use mosaic_core::measures::prokhorov;
use mosaic_core::minkowski::blaschke_body;
use mosaic_core::process::{section_params, zero_cell_of_section};
use mosaic_core::{ProcessSpec, Subspace};
use rand::Rng;

use super::{collect, tag, tau};
use crate::corpus::{phi_corpus, rotation_with_defect};
use crate::parallel::map_replicas;
use crate::stats::{proportion, weighted_fit, LineFit};
use crate::{ExperimentConfig, ResultTable, Result};

/// Random measures per dimension in the sweep corpus, besides the crosses.
const RANDOM_MEASURES: usize = 3;

/// Smallest rotation defect in the sweep, as a fraction of the largest.
const DEFECT_RANGE: f64 = 1e-4;

/// `d_P(π_L φ, ρ π_E φ) / (3|ρ|^{1/3})` for sampled `(φ, L, E)` with `ρ`
/// the direct rotation carrying `E` onto `L` and `|ρ| ≤ max_defect`.
/// Instance 0 uses `E = L`.
pub fn run_lemma1_check(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let corpora: Vec<Vec<ProcessSpec>> = [3, 4].iter().map(|&d| phi_corpus(d, RANDOM_MEASURES, cfg.seed)).collect();
    let raw = map_replicas(cfg.seed, tag::LEMMA1, cfg.replicas, |i, rng| -> Result<[f64; 7]> {
        let d = 3 + i % 2;
        let corpus = &corpora[i % 2];
        let which = (i / 2) % corpus.len();
        let phi = &corpus[which].phi;
        let k = rng.random_range(1..d);
        let defect = if i == 0 { 0.0 } else { cfg.max_defect * DEFECT_RANGE.powf(rng.random::<f64>()) };
        let l = Subspace::random(d, k, rng);
        let e = l.rotated(&rotation_with_defect(d, defect, rng));
        let rho = minimal_rotation(&e, &l)?;
        let r = rho.defect();
        let bound = 3.0 * r.cbrt();
        let tol = if r > 0.0 { 1e-4 * bound.min(1.0) } else { 1e-9 };
        let dp = prokhorov(&phi.project(&l)?, &phi.project(&e)?.rotated(&rho), tol)?;
        let ratio = if r > 0.0 {
            dp / bound
        } else if dp <= tol {
            0.0
        } else {
            f64::INFINITY
        };
        Ok([d as f64, k as f64, which as f64, r, dp, bound, ratio])
    });
    let rows = collect(raw)?;
    let mut table = ResultTable::new("lemma1", &["instance", "d", "k", "phi", "defect", "d_p", "bound", "ratio"]);
    for (i, r) in rows.iter().enumerate() {
        table.push_row(vec![
            i.into(),
            (r[0] as usize).into(),
            (r[1] as usize).into(),
            (r[2] as usize).into(),
            r[3].into(),
            r[4].into(),
            r[5].into(),
            r[6].into(),
        ]);
    }
    let max = rows.iter().map(|r| r[6]).fold(0.0, f64::max);
    let max_defect = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    table.diagnostic("max_ratio", max);
    table.diagnostic("max_defect", max_defect);
    table.assert(
        "max_ratio",
        max <= 1.0 + 1e-3 && max_defect <= cfg.max_defect * (1.0 + 1e-9),
        format!("max ratio {max:.6} over {} instances (<= 1.001 required)", rows.len()),
    );
    Ok(table)
}

/// Bin frequencies of `V_k(Z₀ ∩ L)` for one intensity.
struct RateBlock {
    gamma: f64,
    gamma_tau: f64,
    a: Vec<f64>,
    hits: Vec<usize>,
    fit: Option<LineFit>,
}

fn rate_block(cfg: &ExperimentConfig, spec: &ProcessSpec, a_grid: &[f64], stream: u64) -> Result<RateBlock> {
    let l = &cfg.l_star;
    let section = section_params(spec, l)?;
    let body = blaschke_body(spec, l)?;
    let volumes = collect(map_replicas(cfg.seed, stream, cfg.replicas, |_, rng| -> Result<f64> {
        Ok(zero_cell_of_section(&section, rng)?.volume())
    }))?;
    let hits: Vec<usize> =
        a_grid.iter().map(|&a| volumes.iter().filter(|&&v| v >= a && v < a * (1.0 + cfg.h)).count()).collect();
    let n = cfg.replicas;
    let x: Vec<f64> = a_grid.iter().map(|a| a.powf(1.0 / cfg.k as f64)).collect();
    let y: Vec<f64> = hits.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
    // var(log q̂) ≈ (1 − q)/(n q)
    let w: Vec<f64> = hits.iter().map(|&c| if c == 0 { 0.0 } else { c as f64 / (1.0 - c as f64 / n as f64) }).collect();
    Ok(RateBlock {
        gamma: spec.gamma,
        gamma_tau: section.gamma_section * tau(&body),
        a: a_grid.to_vec(),
        hits,
        fit: weighted_fit(&x, &y, &w),
    })
}

/// Slope of `log P{V_k(Z₀ ∩ L) ∈ a(1, 1 + h)}` against `a^{1/k}` at `γ` and
/// at `2γ` (with `a` scaled by `2^{−k}`), compared with the anchor
/// `−2γ_{X∩L}τ_L`.
pub fn run_lemma6_rate(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let base = rate_block(cfg, &cfg.spec, &cfg.a_grid, tag::LEMMA6)?;
    let doubled_spec = ProcessSpec::new(2.0 * cfg.spec.gamma, cfg.spec.phi.clone())?;
    let scale = 0.5f64.powi(cfg.k as i32);
    let doubled_grid: Vec<f64> = cfg.a_grid.iter().map(|a| a * scale).collect();
    let doubled = rate_block(cfg, &doubled_spec, &doubled_grid, tag::LEMMA6_DOUBLED)?;
    let mut table = ResultTable::new(
        "lemma6",
        &["gamma", "a", "n_samples", "n_in_bin", "q_hat", "stderr", "gamma_tau", "anchor_slope"],
    );
    for b in [&base, &doubled] {
        for (a, &c) in b.a.iter().zip(&b.hits) {
            let (q, se) = proportion(c, cfg.replicas);
            if c == 0 {
                table.flag(format!("empty bin at gamma = {}, a = {a}", b.gamma));
            }
            table.push_row(vec![
                b.gamma.into(),
                (*a).into(),
                cfg.replicas.into(),
                c.into(),
                q.into(),
                se.into(),
                b.gamma_tau.into(),
                (-2.0 * b.gamma_tau).into(),
            ]);
        }
    }
    let slope = |b: &RateBlock| b.fit.map_or(f64::NAN, |f| f.slope);
    let (s1, s2) = (slope(&base), slope(&doubled));
    table.diagnostic("gamma_tau", base.gamma_tau);
    table.diagnostic("anchor_slope", -2.0 * base.gamma_tau);
    table.diagnostic("slope", s1);
    table.diagnostic("slope_se", base.fit.map_or(f64::NAN, |f| f.slope_se));
    table.diagnostic("slope_doubled", s2);
    table.diagnostic("slope_doubled_se", doubled.fit.map_or(f64::NAN, |f| f.slope_se));
    table.diagnostic("slope_in_anchor_units", s1 / base.gamma_tau);
    table.assert("slope_negative", s1 < 0.0 && s2 < 0.0, format!("slopes {s1:.4} and {s2:.4}"));
    let (lo, hi) = (-3.0 * base.gamma_tau, -1.5 * base.gamma_tau);
    table.assert(
        "slope_bracket",
        (lo..=hi).contains(&s1),
        format!("slope {s1:.4} vs [{lo:.4}, {hi:.4}]"),
    );
    let ratio = s2 / s1;
    table.diagnostic("doubling_ratio", ratio);
    table.assert(
        "doubling_scales_slope",
        (ratio / 2.0 - 1.0).abs() <= 0.25,
        format!("slope ratio {ratio:.4} vs 2 (25% tolerance)"),
    );
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Experiment;

    #[test]
    fn lemma1_small_sweep_passes() {
        let cfg = ExperimentConfig { replicas: 24, ..ExperimentConfig::for_experiment(Experiment::Lemma1) };
        let t = run_lemma1_check(&cfg).unwrap();
        assert_eq!(t.rows.len(), 24);
        assert!(t.passed(), "{}", t.summary());
        // identity instance: 0/0 counts as a pass
        assert_eq!(t.column("ratio").unwrap()[0], 0.0);
        assert_eq!(t.column("defect").unwrap()[0], 0.0);
    }

    #[test]
    fn lemma6_anchor_matches_the_cross_value() {
        let cfg = ExperimentConfig {
            replicas: 4000,
            a_grid: vec![4.0, 8.0, 12.0],
            ..ExperimentConfig::for_experiment(Experiment::Lemma6)
        };
        let t = run_lemma6_rate(&cfg).unwrap();
        // γ_{X∩L}τ_L = γ/3 for the cross measure
        assert!((t.metadata.diagnostics["gamma_tau"] - 1.0).abs() < 1e-6);
        let g = t.column("gamma").unwrap();
        assert_eq!(g, vec![3.0, 3.0, 3.0, 6.0, 6.0, 6.0]);
        assert!(t.metadata.diagnostics["slope"] < 0.0);
    }
}
