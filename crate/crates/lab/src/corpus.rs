//! Directional distributions and rotations shared by the deterministic
//! sweeps and the acceptance tests.

use mosaic_core::grassmann::{gaussian_vector, unit};
use mosaic_core::rng::substream;
use mosaic_core::{ProcessSpec, Rotation, SphericalMeasure};
use nalgebra::DVector;
use rand::Rng;

/// The cross measure, an unbalanced cross (in R³) and `random` random
/// spanning measures with `d + 3` antipodal pairs, all with unit intensity.
pub fn phi_corpus(d: usize, random: usize, seed: u64) -> Vec<ProcessSpec> {
    let mut out = vec![ProcessSpec::new(1.0, SphericalMeasure::cross(d)).expect("cross is valid")];
    if d == 3 {
        out.push(ProcessSpec::new(1.0, unbalanced_cross()).expect("valid"));
    }
    let mut rng = substream(seed, d as u64);
    for _ in 0..random {
        out.push(ProcessSpec::new(1.0, random_measure(d, d + 3, &mut rng)).expect("random measure spans"));
    }
    out
}

/// `±e₁` with mass 0.3 each and `±e₂`, `±e₃` with mass 0.1 each.
pub fn unbalanced_cross() -> SphericalMeasure {
    SphericalMeasure::make_even(&[(unit(3, 0), 0.3), (unit(3, 1), 0.1), (unit(3, 2), 0.1)])
        .expect("valid atoms")
        .normalized()
}

/// A spanning even probability measure with `pairs` antipodal pairs of
/// Gaussian directions and masses uniform in `[0.2, 1)`.
pub fn random_measure<R: Rng + ?Sized>(d: usize, pairs: usize, rng: &mut R) -> SphericalMeasure {
    loop {
        let atoms: Vec<(DVector<f64>, f64)> =
            (0..pairs).map(|_| (gaussian_vector(d, rng).normalize(), rng.random_range(0.2..1.0))).collect();
        if let Ok(m) = SphericalMeasure::make_even(&atoms) {
            if m.spans() {
                return m.normalized();
            }
        }
    }
}

/// A rotation of `R^d` with defect `defect`, turning a random plane.
pub fn rotation_with_defect<R: Rng + ?Sized>(d: usize, defect: f64, rng: &mut R) -> Rotation {
    // a plane rotation by θ has defect √8·sin(θ/2)
    let angle = 2.0 * (defect / 8f64.sqrt()).asin();
    let a = gaussian_vector(d, rng).normalize();
    let mut b = gaussian_vector(d, rng);
    b -= &a * a.dot(&b);
    Rotation::in_plane(&a, &b.normalize(), angle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_members_are_valid_processes() {
        for d in [2, 3, 4] {
            let c = phi_corpus(d, 3, 5);
            assert_eq!(c.len(), if d == 3 { 5 } else { 4 });
            for s in &c {
                assert!((s.phi.total_mass() - 1.0).abs() < 1e-12 && s.phi.spans());
            }
        }
    }

    #[test]
    fn rotations_have_the_requested_defect() {
        let mut rng = substream(3, 0);
        for d in [2, 3, 4] {
            for &t in &[1e-6, 0.01, 0.125, 1.0] {
                let r = rotation_with_defect(d, t, &mut rng);
                assert!((r.defect() - t).abs() < 1e-9 * t.max(1.0), "{} vs {t}", r.defect());
            }
        }
    }
}
