//! Two-route agreement: weighted typical faces drawn directly from the
//! process against area-weighted interior faces of arrangement windows.

use mosaic_core::arrangement::{pooled_estimate, sample_face_complex, WindowSums};
use mosaic_core::minkowski::blaschke_body;
use mosaic_core::process::FaceSampler;
use mosaic_core::shape::deviation_cross_space;
use mosaic_core::{Error, Polytope};

use super::{collect, require_arrangement, tag};
use crate::parallel::map_replicas;
use crate::stats::{agree_within, mean_se};
use crate::{ExperimentConfig, ResultTable, Result};

/// Faces each route must contribute.
pub const MIN_FACES: usize = 2000;

const STATISTICS: [&str; 3] = ["one", "volume", "deviation"];

/// `(1, V_k, ϑ(F, B_D))` for a face `F` with direction `D`, using the
/// Blaschke bodies of the flats in the support.
fn statistics(sampler: &FaceSampler, bodies: &[Polytope], face: &Polytope) -> Result<[f64; 3]> {
    let d = face.direction_space();
    let j = sampler.flats.entries.iter().position(|(l, _)| l.approx_eq(d)).ok_or(Error::NotInSupport)?;
    Ok([1.0, face.volume(), deviation_cross_space(face, &bodies[j])?.value])
}

pub fn run_consistency(cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_arrangement(cfg)?;
    let sampler = FaceSampler::new(&cfg.spec, cfg.k)?;
    let bodies: Vec<Polytope> =
        sampler.flats.entries.iter().map(|(l, _)| blaschke_body(&cfg.spec, l)).collect::<mosaic_core::Result<_>>()?;

    let process = collect(map_replicas(cfg.seed, tag::CONSISTENCY_PROCESS, cfg.replicas, |_, rng| {
        let (_, face) = sampler.sample(rng)?;
        statistics(&sampler, &bodies, &face)
    }))?;
    let windows = collect(map_replicas(cfg.seed, tag::CONSISTENCY_WINDOWS, cfg.windows, |_, rng| -> Result<[WindowSums; 3]> {
        let complex = sample_face_complex(&cfg.spec, cfg.window, rng)?;
        let mut sums = [WindowSums::default(); 3];
        for face in complex.interior_faces() {
            let w = complex.edge_weight(&face.polytope);
            if w == 0.0 {
                continue;
            }
            let f = statistics(&sampler, &bodies, &face.polytope)?;
            let v = f[1];
            for (s, fv) in sums.iter_mut().zip(f) {
                s.count += 1;
                s.w += w;
                s.wf += w * fv;
                s.wv += w * v;
                s.wfv += w * fv * v;
            }
        }
        Ok(sums)
    }))?;

    let mut table = ResultTable::new(
        "consistency",
        &["statistic", "process_mean", "process_se", "arrangement_mean", "arrangement_se", "z", "n_process", "n_arrangement"],
    );
    let mut z_all = Vec::new();
    let mut n_arr = 0;
    for (i, name) in STATISTICS.iter().enumerate() {
        let values: Vec<f64> = process.iter().map(|f| f[i]).collect();
        let (pm, pse) = mean_se(&values);
        let per_window: Vec<WindowSums> = windows.iter().map(|w| w[i]).collect();
        let est = pooled_estimate(&per_window)?;
        n_arr = est.faces;
        let spread = pse.hypot(est.weighted_se);
        let z = if spread > 0.0 { (pm - est.weighted) / spread } else { 0.0 };
        table.push_row(vec![
            (*name).into(),
            pm.into(),
            pse.into(),
            est.weighted.into(),
            est.weighted_se.into(),
            z.into(),
            process.len().into(),
            est.faces.into(),
        ]);
        let ok = if spread > 0.0 { agree_within(pm, pse, est.weighted, est.weighted_se, 3.0) } else { pm == est.weighted };
        table.assert(&format!("agreement_{name}"), ok, format!("{pm:.5} vs {:.5} (z = {z:.3})", est.weighted));
        z_all.push(z);
    }
    table.diagnostic("windows", cfg.windows as f64);
    table.diagnostic("window_half_width", cfg.window);
    table.assert(
        "sample_sizes",
        process.len() >= MIN_FACES && n_arr >= MIN_FACES,
        format!("{} process faces, {n_arr} arrangement faces (>= {MIN_FACES} each)", process.len()),
    );
    table.diagnostic("max_abs_z", z_all.iter().fold(0.0, |m: f64, z| m.max(z.abs())));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Experiment;

    #[test]
    fn constant_statistic_agrees_exactly() {
        let cfg =
            ExperimentConfig { replicas: 500, windows: 3, ..ExperimentConfig::for_experiment(Experiment::Consistency) };
        let t = run_consistency(&cfg).unwrap();
        assert_eq!(t.rows.len(), 3);
        let p = t.column("process_mean").unwrap();
        let a = t.column("arrangement_mean").unwrap();
        assert_eq!((p[0], a[0]), (1.0, 1.0));
        assert!(t.assertions[0].passed);
        // E V₂ of the weighted typical face is 4 at γ = 3
        assert!((p[1] - 4.0).abs() < 1.0, "{}", p[1]);
    }
}
