//! Deviation probabilities of large faces near a fixed direction, by the
//! process route and the arrangement route, and the limit-shape demo.

use mosaic_core::arrangement::sample_face_complex;
use mosaic_core::grassmann::delta;

use super::{collect, require_arrangement, tag, Target};
use crate::parallel::map_replicas;
use crate::stats::{agree_within, median_se, non_increasing_up_to, proportion, quantile, ratio_estimate, weighted_fit, wilson, Z95};
use crate::{Cell, ExperimentConfig, ResultTable, Result};

/// A sampled face whose direction passed the neighbourhood filter.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Draw {
    /// `Δ(D, L*)`.
    pub delta: f64,
    /// `V_k`.
    pub volume: f64,
    /// `ϑ(face, B_{L*})`, or NaN when the face is below the smallest `a`.
    pub deviation: f64,
    /// Edge-correction weight (1 on the process route).
    pub weight: f64,
}

/// Weighted typical faces with `Δ(D, L*) < theta`. Directions are drawn
/// first and rejected before the face is built.
pub(crate) fn process_draws(cfg: &ExperimentConfig, t: &Target, tag: u64, theta: f64, a_min: f64) -> Result<Vec<Draw>> {
    let raw = map_replicas(cfg.seed, tag, cfg.replicas, |_, rng| -> Result<Option<Draw>> {
        let i = t.sampler.pick(rng);
        if t.flat_delta[i] >= theta {
            return Ok(None);
        }
        let face = t.sampler.face_in(i, rng)?;
        let volume = face.volume();
        let deviation = if volume >= a_min { t.deviation(&face)? } else { f64::NAN };
        Ok(Some(Draw { delta: t.flat_delta[i], volume, deviation, weight: 1.0 }))
    });
    Ok(collect(raw)?.into_iter().flatten().collect())
}

/// Interior faces of independent windows with `Δ(D, L*) < theta`, grouped
/// by window.
pub(crate) fn window_draws(cfg: &ExperimentConfig, t: &Target, tag: u64, theta: f64, a_min: f64) -> Result<Vec<Vec<Draw>>> {
    let raw = map_replicas(cfg.seed, tag, cfg.windows, |_, rng| -> Result<Vec<Draw>> {
        let complex = sample_face_complex(&cfg.spec, cfg.window, rng)?;
        let mut out = Vec::new();
        for face in complex.interior_faces() {
            let weight = complex.edge_weight(&face.polytope);
            if weight == 0.0 {
                continue;
            }
            let dl = delta(face.polytope.direction_space(), &cfg.l_star)?;
            if dl >= theta {
                continue;
            }
            let volume = face.polytope.volume();
            let deviation = if volume >= a_min { t.deviation(&face.polytope)? } else { f64::NAN };
            out.push(Draw { delta: dl, volume, deviation, weight });
        }
        Ok(out)
    });
    collect(raw)
}

/// Fits `log p̂` against `a^{1/k}` with inverse-variance weights and
/// records slope, its error and the intercept.
fn record_fit(table: &mut ResultTable, cfg: &ExperimentConfig, a: &[f64], p: &[f64], se: &[f64], prefix: &str) {
    let x: Vec<f64> = a.iter().map(|a| a.powf(1.0 / cfg.k as f64)).collect();
    let y: Vec<f64> = p.iter().map(|p| p.ln()).collect();
    // var(log p̂) ≈ (se/p)²
    let w: Vec<f64> = p.iter().zip(se).map(|(p, s)| (p / s).powi(2)).collect();
    match weighted_fit(&x, &y, &w) {
        Some(f) => {
            table.diagnostic(&format!("{prefix}slope"), f.slope);
            table.diagnostic(&format!("{prefix}slope_se"), f.slope_se);
            table.diagnostic(&format!("{prefix}intercept"), f.intercept);
        }
        None => table.flag(format!("{prefix}fit needs two rows with 0 < p̂ < 1")),
    }
}

/// Rows with data, for the monotone check.
fn estimable(p: &[f64], se: &[f64]) -> (Vec<f64>, Vec<f64>) {
    p.iter().zip(se).filter(|(p, s)| p.is_finite() && s.is_finite()).map(|(p, s)| (*p, *s)).unzip()
}

fn record_exponents(table: &mut ResultTable, cfg: &ExperimentConfig) {
    let k = cfg.k as f64;
    table.diagnostic("epsilon_power", cfg.epsilon.powf(k + 1.0));
    table.diagnostic("a_exponent", 1.0 / k);
}

/// `P{ϑ ≥ ε | V_k ≥ a, D ∈ N_θ(L*)}` for the weighted typical face.
pub fn run_theorem1(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let t = Target::new(cfg)?;
    let draws = process_draws(cfg, &t, tag::THEOREM1, cfg.theta, 0.0)?;
    let mut table = ResultTable::new(
        "theorem1",
        &["a", "n_conditioned", "n_deviating", "p_hat", "stderr", "wilson_lo", "wilson_hi", "tau_l_star", "gamma_section"],
    );
    let (mut ps, mut ses) = (Vec::new(), Vec::new());
    for &a in &cfg.a_grid {
        let cond: Vec<&Draw> = draws.iter().filter(|d| d.volume >= a).collect();
        let n = cond.len();
        let m = cond.iter().filter(|d| d.deviation >= cfg.epsilon).count();
        let (p, se) = proportion(m, n);
        let (lo, hi) = wilson(m, n, Z95);
        if n == 0 {
            table.flag(format!("no conditioned samples at a = {a}"));
        }
        table.push_row(vec![
            a.into(),
            n.into(),
            m.into(),
            p.into(),
            se.into(),
            lo.into(),
            hi.into(),
            t.tau.into(),
            t.gamma_section.into(),
        ]);
        ps.push(p);
        ses.push(se);
    }
    let all = draws.len();
    let dev_all = draws.iter().filter(|d| d.deviation >= cfg.epsilon).count();
    table.diagnostic("p_unconditioned", proportion(dev_all, all).0);
    table.diagnostic("neighbourhood_rate", all as f64 / cfg.replicas as f64);
    table.diagnostic("raw_samples", cfg.replicas as f64);
    record_exponents(&mut table, cfg);
    record_fit(&mut table, cfg, &cfg.a_grid, &ps, &ses, "");
    push_invariants(&mut table);
    let (p, se) = estimable(&ps, &ses);
    table.assert(
        "non_increasing",
        non_increasing_up_to(&p, &se, 2.0),
        format!("p_hat = {}", fmt_list(&p)),
    );
    Ok(table)
}

/// `p̂ ∈ [0, 1]` and `n_deviating ≤ n_conditioned` on every row.
fn push_invariants(table: &mut ResultTable) {
    let p = table.column("p_hat").unwrap_or_default();
    let n = table.column("n_conditioned").unwrap_or_default();
    let m = table.column("n_deviating").unwrap_or_default();
    let unit = p.iter().all(|p| p.is_nan() || (0.0..=1.0).contains(p));
    let counts = n.iter().zip(&m).all(|(n, m)| m <= n);
    table.assert("row_invariants", unit && counts, "p_hat in [0, 1] and n_deviating <= n_conditioned");
}

pub(crate) fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

/// The same probabilities for the typical face, read off arrangement
/// windows with edge-corrected weights, and compared with the process
/// route reweighted by `1/V_k`.
pub fn run_theorem2(cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_arrangement(cfg)?;
    let t = Target::new(cfg)?;
    let a_min = cfg.a_grid[0];
    let windows = window_draws(cfg, &t, tag::THEOREM2_WINDOWS, cfg.theta, a_min)?;
    let process = process_draws(cfg, &t, tag::THEOREM2_PROCESS, cfg.theta, a_min)?;
    let mut table = ResultTable::new(
        "theorem2",
        &[
            "a",
            "n_conditioned",
            "n_deviating",
            "p_hat",
            "stderr",
            "p_process",
            "stderr_process",
            "tau_l_star",
            "gamma_section",
        ],
    );
    let (mut ps, mut ses) = (Vec::new(), Vec::new());
    let mut agree = true;
    let mut z = Vec::new();
    for &a in &cfg.a_grid {
        let hit = |d: &Draw| d.volume >= a;
        let dev = |d: &Draw| d.volume >= a && d.deviation >= cfg.epsilon;
        let n = windows.iter().flatten().filter(|d| hit(d)).count();
        let m = windows.iter().flatten().filter(|d| dev(d)).count();
        let den: Vec<f64> = windows.iter().map(|w| w.iter().filter(|d| hit(d)).map(|d| d.weight).sum()).collect();
        let num: Vec<f64> = windows.iter().map(|w| w.iter().filter(|d| dev(d)).map(|d| d.weight).sum()).collect();
        let (p, se) = if n == 0 { (f64::NAN, f64::NAN) } else { ratio_estimate(&num, &den) };
        // typical-face law = weighted law tilted by 1/V_k
        let pden: Vec<f64> = process.iter().map(|d| if hit(d) { 1.0 / d.volume } else { 0.0 }).collect();
        let pnum: Vec<f64> = process.iter().map(|d| if dev(d) { 1.0 / d.volume } else { 0.0 }).collect();
        let (pp, pse) = ratio_estimate(&pnum, &pden);
        if n == 0 {
            table.flag(format!("no conditioned faces at a = {a}"));
        } else if pp.is_finite() {
            agree &= agree_within(p, se, pp, pse, 3.0);
            z.push((p - pp) / se.hypot(pse));
        }
        table.push_row(vec![
            a.into(),
            n.into(),
            m.into(),
            p.into(),
            se.into(),
            pp.into(),
            pse.into(),
            t.tau.into(),
            t.gamma_section.into(),
        ]);
        ps.push(p);
        ses.push(se);
    }
    table.diagnostic("windows", cfg.windows as f64);
    table.diagnostic("window_half_width", cfg.window);
    table.diagnostic("faces_in_neighbourhood", windows.iter().map(Vec::len).sum::<usize>() as f64);
    record_exponents(&mut table, cfg);
    record_fit(&mut table, cfg, &cfg.a_grid, &ps, &ses, "");
    push_invariants(&mut table);
    let (p, se) = estimable(&ps, &ses);
    table.assert("non_increasing", non_increasing_up_to(&p, &se, 2.0), format!("p_hat = {}", fmt_list(&p)));
    table.assert(
        "process_route_agreement",
        agree && !z.is_empty(),
        format!("z = {} (|z| <= 3 required)", fmt_list(&z)),
    );
    Ok(table)
}

/// Quantiles of `ϑ(face, B_{L*})` along a joint schedule of growing `a`
/// and shrinking `θ`.
pub fn run_limit_shape_demo(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let t = Target::new(cfg)?;
    let theta_max = cfg.schedule.iter().map(|s| s.theta).fold(0.0, f64::max);
    let a_min = cfg.schedule.iter().map(|s| s.a).fold(f64::INFINITY, f64::min);
    let draws = process_draws(cfg, &t, tag::LIMIT_SHAPE, theta_max, a_min)?;
    let mut table = ResultTable::new(
        "limitshape",
        &["stage", "a", "theta", "n", "q10", "q25", "median", "q75", "q90", "median_se"],
    );
    let (mut med, mut mse) = (Vec::new(), Vec::new());
    for (i, s) in cfg.schedule.iter().enumerate() {
        let mut v: Vec<f64> =
            draws.iter().filter(|d| d.volume >= s.a && d.delta < s.theta).map(|d| d.deviation).collect();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            table.flag(format!("stage {i} (a = {}, theta = {}) has no samples", s.a, s.theta));
        }
        let q: Vec<Cell> = [0.1, 0.25, 0.5, 0.75, 0.9].iter().map(|&q| quantile(&v, q).into()).collect();
        let m = quantile(&v, 0.5);
        let se = median_se(&v);
        let mut row = vec![i.into(), s.a.into(), s.theta.into(), v.len().into()];
        row.extend(q);
        row.push(se.into());
        table.push_row(row);
        if m.is_finite() && se.is_finite() {
            med.push(m);
            mse.push(se);
        }
    }
    table.diagnostic("raw_samples", cfg.replicas as f64);
    table.assert(
        "median_non_increasing",
        med.len() >= 2 && non_increasing_up_to(&med, &mse, 2.0),
        format!("medians = {}", fmt_list(&med)),
    );
    Ok(table)
}
