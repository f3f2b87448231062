//! Homothety deviation of convex bodies.
//!
//! For a body `K` and an o-symmetric body `M` in the same subspace,
//!
//! ```text
//! ϑ(K, M) = min { log(β/α) : αM ⊂ K + z ⊂ βM, z ∈ L, 0 < α ≤ β }.
//! ```
//!
//! For polytopes the inclusions are exact when tested on facet normals:
//! `αM ⊂ K + z` at the normals of `K`, `K + z ⊂ βM` at the normals of `M`.
//! Substituting `s = 1/α`, `w = z/α`, `q = β/α` turns the problem into a
//! linear program in `(s, w, q)` with objective `q`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::grassmann::{delta, minimal_rotations, Rotation, SUBSPACE_EQ_TOL};
use crate::lp::LinearProgram;
use crate::polytope::Polytope;
use crate::{Error, Result};

/// Tolerance of the o-symmetry check on `M`, relative to its size.
const SYMMETRY_TOL: f64 = 1e-9;

/// Value of `ϑ` together with a witness `αM ⊂ ρK + z ⊂ βM`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationResult {
    pub value: f64,
    /// Ambient translation `z`.
    pub witness_translation: Vec<f64>,
    pub witness_alpha: f64,
    pub witness_beta: f64,
    /// Rotation applied to `K` before comparing; the identity within one
    /// subspace.
    pub witness_rotation: Rotation,
}

/// `ϑ(K, M)` for bodies sharing a carrier. `K` may sit in any translate of
/// the carrier.
pub fn deviation_same_space(k: &Polytope, m: &Polytope) -> Result<DeviationResult> {
    let d = m.ambient_dim();
    if k.ambient_dim() != d || k.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: k.dim() });
    }
    let l = m.direction_space();
    if !k.direction_space().approx_eq(l) {
        return Err(Error::InvalidParameter("bodies lie in different subspaces".into()));
    }
    if !m.is_o_symmetric(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric);
    }
    let k_local = k.in_frame(l)?;
    let shift = l.to_local(k_local.anchor());
    let kv: Vec<DVector<f64>> = k_local.local_vertices().into_iter().map(|v| v + &shift).collect();
    let mv = m.local_vertices();
    let support = |vs: &[DVector<f64>], u: &DVector<f64>| vs.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max);

    // (normal, h_K, h_M) at the facet normals of K and of M
    let k_rays: Vec<(DVector<f64>, f64, f64)> = k_local
        .local_facets()
        .into_iter()
        .map(|f| {
            let hk = f.offset + f.normal.dot(&shift);
            let hm = support(&mv, &f.normal);
            (f.normal, hk, hm)
        })
        .collect();
    let m_rays: Vec<(DVector<f64>, f64, f64)> = m
        .local_facets()
        .into_iter()
        .map(|f| {
            let hk = support(&kv, &f.normal);
            (f.normal, hk, f.offset)
        })
        .collect();

    let dim = l.dim();
    let n = dim + 2;
    let mut rows = Vec::with_capacity(k_rays.len() + m_rays.len());
    for (u, hk, hm) in &k_rays {
        let mut a = vec![0.0; n];
        a[0] = -hk;
        for i in 0..dim {
            a[1 + i] = -u[i];
        }
        rows.push((a, -hm));
    }
    for (u, hk, hm) in &m_rays {
        let mut a = vec![0.0; n];
        a[0] = *hk;
        for i in 0..dim {
            a[1 + i] = u[i];
        }
        a[n - 1] = -hm;
        rows.push((a, 0.0));
    }
    let mut c = vec![0.0; n];
    c[n - 1] = 1.0;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    bounds[0] = (0.0, f64::INFINITY);
    bounds[n - 1] = (0.0, f64::INFINITY);
    let x = LinearProgram { c, bounds, rows }.solve()?;
    if !(x[0] > 0.0) {
        return Err(Error::Degenerate("deviation program returned s = 0".into()));
    }
    let z = DVector::from_fn(dim, |i, _| x[1 + i] / x[0]);

    let alpha = k_rays.iter().map(|(u, hk, hm)| (hk + u.dot(&z)) / hm).fold(f64::INFINITY, f64::min);
    let beta = m_rays.iter().map(|(u, hk, hm)| (hk + u.dot(&z)) / hm).fold(f64::NEG_INFINITY, f64::max);
    if !(alpha > 0.0) {
        return Err(Error::Degenerate("translated body does not contain the origin".into()));
    }
    // ambient witness: the in-plane shift plus removal of the off-plane offset
    let anchor = k_local.anchor();
    let off_plane = anchor - l.project(anchor);
    let z_ambient = l.from_local(&z) - off_plane;
    Ok(DeviationResult {
        value: (beta / alpha).ln().max(0.0),
        witness_translation: z_ambient.iter().copied().collect(),
        witness_alpha: alpha,
        witness_beta: beta,
        witness_rotation: Rotation::identity(d),
    })
}

/// `ϑ(K, M)` for `K ⊂ L`, `M ⊂ E`: the minimum of [`deviation_same_space`]
/// over the defect-minimal rotations carrying `L` onto `E`.
pub fn deviation_cross_space(k: &Polytope, m: &Polytope) -> Result<DeviationResult> {
    let (l, e) = (k.direction_space(), m.direction_space());
    if delta(l, e)? < SUBSPACE_EQ_TOL {
        return deviation_same_space(k, m);
    }
    let mut best: Option<DeviationResult> = None;
    for rho in minimal_rotations(l, e)? {
        let mut r = deviation_same_space(&k.rotated(&rho), m)?;
        r.witness_rotation = rho;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least the direct rotation is a candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{minimal_rotation, Subspace};
    use crate::polytope::tests::{random_polytope, random_symmetric_polytope};
    use crate::polytope::Halfspace;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn polygon(l: &Subspace, hs: &[([f64; 2], f64)]) -> Polytope {
        let hs: Vec<Halfspace> =
            hs.iter().map(|(n, t)| Halfspace::new(l.from_local(&v(n)), *t).unwrap()).collect();
        Polytope::intersect_halfspaces(l, &hs, 100.0).unwrap()
    }

    fn square(l: &Subspace) -> Polytope {
        polygon(l, &[([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0), ([0.0, 1.0], 1.0), ([0.0, -1.0], 1.0)])
    }

    fn diamond(l: &Subspace) -> Polytope {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        polygon(l, &[([s, s], s), ([-s, s], s), ([s, -s], s), ([-s, -s], s)])
    }

    /// Grid oracle in the plane: `log R(z)/r(z)` with support numbers taken
    /// at all edge normals and vertex directions of both bodies, minimised
    /// over a 200 × 200 grid of `z` and then on shrinking local grids.
    fn grid_oracle(k: &Polytope, m: &Polytope) -> f64 {
        let kv: Vec<[f64; 2]> = k.polygon_outline().unwrap();
        let mv: Vec<[f64; 2]> = m.polygon_outline().unwrap();
        let h = |vs: &[[f64; 2]], u: [f64; 2]| vs.iter().map(|p| p[0] * u[0] + p[1] * u[1]).fold(f64::MIN, f64::max);
        let mut rays: Vec<[f64; 2]> = Vec::new();
        for vs in [&kv, &mv] {
            let n = vs.len();
            for i in 0..n {
                let (a, b) = (vs[i], vs[(i + 1) % n]);
                let e = [b[0] - a[0], b[1] - a[1]];
                let len = e[0].hypot(e[1]);
                rays.push([e[1] / len, -e[0] / len]);
                let r = a[0].hypot(a[1]);
                if r > 1e-12 {
                    rays.push([a[0] / r, a[1] / r]);
                    rays.push([-a[0] / r, -a[1] / r]);
                }
            }
        }
        let hk: Vec<f64> = rays.iter().map(|&u| h(&kv, u)).collect();
        let hm: Vec<f64> = rays.iter().map(|&u| h(&mv, u)).collect();
        let f = |z: [f64; 2]| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (i, u) in rays.iter().enumerate() {
                let r = (hk[i] + u[0] * z[0] + u[1] * z[1]) / hm[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if lo <= 0.0 {
                // outside the domain, still increasing away from it
                1e6 - lo
            } else {
                (hi / lo).ln()
            }
        };
        // −z must lie in K
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &kv {
            x0 = x0.min(-p[0]);
            x1 = x1.max(-p[0]);
            y0 = y0.min(-p[1]);
            y1 = y1.max(-p[1]);
        }
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in 0..200 {
            for j in 0..200 {
                let z = [x0 + (x1 - x0) * (i as f64 + 0.5) / 200.0, y0 + (y1 - y0) * (j as f64 + 0.5) / 200.0];
                let val = f(z);
                if val < best.1 {
                    best = (z, val);
                }
            }
        }
        // nested golden sections: ϑ(z) is quasi-convex and so is its
        // partial minimum over z₂
        let golden = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| {
            let r = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (a, b);
            let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
            let (mut gc, mut gd) = (g(c), g(d));
            for _ in 0..90 {
                if gc < gd {
                    b = d;
                    (d, gd) = (c, gc);
                    c = b - r * (b - a);
                    gc = g(c);
                } else {
                    a = c;
                    (c, gc) = (d, gd);
                    d = a + r * (b - a);
                    gd = g(d);
                }
            }
            gc.min(gd)
        };
        let inner = |z1: f64| golden(y0, y1, &|z2| f([z1, z2]));
        best.1.min(golden(x0, x1, &inner))
    }

    fn witness_holds(k: &Polytope, m: &Polytope, r: &DeviationResult, tol: f64) -> bool {
        let z = DVector::from_column_slice(&r.witness_translation);
        let kz = k.rotated(&r.witness_rotation).translated(&z);
        let l = m.direction_space();
        let mut rays: Vec<DVector<f64>> = kz.facets().into_iter().map(|f| f.normal).collect();
        rays.extend(m.facets().into_iter().map(|f| f.normal));
        for u in &rays {
            let (hk, hm) = (kz.support(u), m.support(u));
            if r.witness_alpha * hm > hk + tol || hk > r.witness_beta * hm + tol {
                return false;
            }
        }
        // K + z lies in the linear carrier
        kz.vertices().iter().all(|p| l.contains(p, tol))
            && (r.value - (r.witness_beta / r.witness_alpha).ln()).abs() < 1e-10
    }

    #[test]
    fn body_against_itself() {
        let l = Subspace::whole(2);
        let r = deviation_same_space(&square(&l), &square(&l)).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!((r.witness_alpha - 1.0).abs() < 1e-12 && (r.witness_beta - 1.0).abs() < 1e-12);
        assert!(r.witness_translation.iter().all(|z| z.abs() < 1e-12));
    }

    #[test]
    fn square_against_diamond() {
        let l = Subspace::whole(2);
        let (k, m) = (square(&l), diamond(&l));
        let r = deviation_same_space(&k, &m).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-10, "{r:?}");
        assert!((r.witness_alpha - 1.0).abs() < 1e-10 && (r.witness_beta - 2.0).abs() < 1e-10);
        assert!(r.witness_translation.iter().all(|z| z.abs() < 1e-10));
        assert!((grid_oracle(&k, &m) - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn homothets_have_zero_deviation_and_perturbations_do_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3] {
            let l = Subspace::whole(d);
            for _ in 0..5 {
                let m = random_symmetric_polytope(&l, 4, &mut rng);
                let t = crate::grassmann::gaussian_vector(d, &mut rng);
                let k = m.scaled(2.7).translated(&t);
                assert!(deviation_same_space(&k, &m).unwrap().value < 1e-9);
                // cut a corner off
                let far = k.vertices().into_iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
                let u = (&far - k.centroid()).normalize();
                let cut = Halfspace::new(u.clone(), u.dot(&far) - 0.05).unwrap();
                let mut hs: Vec<Halfspace> =
                    k.facets().into_iter().map(|f| Halfspace::new(f.normal, f.offset).unwrap()).collect();
                hs.push(cut);
                let k2 = Polytope::intersect_halfspaces(&l, &hs, 100.0).unwrap();
                assert!(deviation_same_space(&k2, &m).unwrap().value > 1e-4);
            }
        }
    }

    #[test]
    fn asymmetric_reference_is_rejected() {
        let l = Subspace::whole(2);
        let tri = polygon(&l, &[([0.0, -1.0], 1.0), ([1.0, 1.0], 1.0), ([-1.0, 1.0], 1.0)]);
        assert_eq!(deviation_same_space(&square(&l), &tri), Err(Error::NotSymmetric));
        let other = Subspace::coordinate(3, &[0, 1]).unwrap();
        let k3 = square(&Subspace::coordinate(3, &[1, 2]).unwrap());
        assert!(deviation_same_space(&k3, &square(&other)).is_err());
        assert!(matches!(
            deviation_same_space(&square(&l), &square(&other)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cross_space_reduces_to_same_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = Subspace::random(3, 2, &mut rng);
        let k = random_polytope(&l, 6, &mut rng);
        let m = random_symmetric_polytope(&l, 3, &mut rng);
        let a = deviation_same_space(&k, &m).unwrap();
        let b = deviation_cross_space(&k, &m).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        assert_eq!(b.witness_rotation, Rotation::identity(3));
    }

    #[test]
    fn rotated_copy_has_zero_cross_deviation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let l = Subspace::random(3, 2, &mut rng);
            let e = Subspace::random(3, 2, &mut rng);
            let k = random_symmetric_polytope(&l, 3, &mut rng);
            let rho = minimal_rotation(&l, &e).unwrap();
            let m = k.rotated(&rho);
            let r = deviation_cross_space(&k, &m).unwrap();
            assert!(r.value < 1e-8, "{}", r.value);
            assert!(witness_holds(&k, &m, &r, 1e-8));
        }
    }

    #[test]
    fn right_angle_family_is_searched() {
        // L ⟂-meets E along one axis: the direct rotation is not unique
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let e = Subspace::coordinate(3, &[0, 2]).unwrap();
        let k = polygon(&l, &[([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0), ([0.0, 1.0], 2.0), ([0.0, -1.0], 1.0)]);
        let m = square(&e);
        let r = deviation_cross_space(&k, &m).unwrap();
        assert!(witness_holds(&k, &m, &r, 1e-8));
        assert!(r.witness_rotation.defect() <= delta(&l, &e).unwrap() + 1e-9);
        // a 1 × 1.5 rectangle against a unit square
        assert!((r.value - 1.5f64.ln()).abs() < 1e-9, "{}", r.value);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn agrees_with_the_grid_oracle(seed in any::<u64>(), nk in 3usize..8, nm in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = Subspace::whole(2);
            let k = random_polytope(&l, nk, &mut rng);
            let m = random_symmetric_polytope(&l, nm, &mut rng);
            let r = deviation_same_space(&k, &m).unwrap();
            prop_assert!(witness_holds(&k, &m, &r, 1e-8));
            let g = grid_oracle(&k, &m);
            prop_assert!((r.value - g).abs() < 1e-4, "{} vs {}", r.value, g);
            prop_assert!(r.value <= g + 1e-9);
        }

        #[test]
        fn invariances(seed in any::<u64>(), d in 2usize..4, lambda in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = if d == 3 { Subspace::whole(3) } else { Subspace::random(3, 2, &mut rng) };
            let k = random_polytope(&l, 7, &mut rng);
            let m = random_symmetric_polytope(&l, 3, &mut rng);
            let base = deviation_same_space(&k, &m).unwrap();
            prop_assert!(witness_holds(&k, &m, &base, 1e-8));
            let t = crate::grassmann::gaussian_vector(3, &mut rng);
            let moved = deviation_same_space(&k.scaled(lambda).translated(&t), &m).unwrap();
            prop_assert!((moved.value - base.value).abs() < 1e-8);
            let rho = Rotation::random(3, &mut rng);
            let turned = deviation_same_space(&k.rotated(&rho), &m.rotated(&rho)).unwrap();
            prop_assert!((turned.value - base.value).abs() < 1e-8);
        }

        #[test]
        fn symmetric_in_symmetric_arguments(seed in any::<u64>(), d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = Subspace::random(3, d, &mut rng);
            let e = Subspace::random(3, d, &mut rng);
            let k = random_symmetric_polytope(&l, 3, &mut rng);
            let m = random_symmetric_polytope(&e, 4, &mut rng);
            let a = deviation_cross_space(&k, &m).unwrap().value;
            let b = deviation_cross_space(&m, &k).unwrap().value;
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn triangle_inequality(seed in any::<u64>(), d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = Subspace::random(3, d, &mut rng);
            let l_star = Subspace::random(3, d, &mut rng);
            let e = Subspace::random(3, d, &mut rng);
            let rho = minimal_rotation(&e, &l).unwrap();
            let k = random_polytope(&e, 6, &mut rng).rotated(&rho);
            let b_l = random_symmetric_polytope(&e, 3, &mut rng).rotated(&rho);
            let b_star = random_symmetric_polytope(&l_star, 3, &mut rng);
            let lhs = deviation_cross_space(&k, &b_star).unwrap().value;
            let rhs = deviation_same_space(&k, &b_l).unwrap().value
                + deviation_cross_space(&b_l, &b_star).unwrap().value;
            prop_assert!(lhs <= rhs + 1e-8, "{} > {}", lhs, rhs);
        }
    }
}
