//! The discrete Minkowski problem: find the o-symmetric polytope whose
//! surface area measure is a prescribed even atomic measure.
//!
//! In the plane the polygon is assembled directly from its edge vectors. In
//! dimension three the solution maximises volume on the slice
//! `{h : Σ μ_i h_i = 1}` of support numbers; the optimum has facet areas
//! proportional to `μ`, and rescaling fixes the constant.

use nalgebra::{DMatrix, DVector};

use crate::grassmann::Subspace;
use crate::measures::{prokhorov, SphericalMeasure};
use crate::polytope::{Label, Polytope};
use crate::process::{section_params, ProcessSpec};
use crate::{Error, Result};

/// Iteration cap for the three-dimensional solver.
pub const MAX_ITERS: usize = 10_000;

/// Facets below this fraction of the total surface area count as vanished.
pub const TINY_FACET: f64 = 1e-10;

/// Default residual tolerance for Blaschke bodies.
pub const BLASCHKE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MinkowskiSolution {
    /// The o-symmetric solution body, in the target subspace.
    pub body: Polytope,
    /// Prokhorov distance between the body's surface area measure and the
    /// target.
    pub residual: f64,
    pub iterations: usize,
    /// Indices of target atoms whose facet vanished numerically.
    pub vanished: Vec<usize>,
}

/// The target measure in frame coordinates of `l`, accepting either a
/// measure on `S^{k−1}` or an ambient measure concentrated on `l`.
fn local_target(mu: &SphericalMeasure, l: &Subspace) -> Result<SphericalMeasure> {
    if mu.dim() == l.dim() {
        Ok(mu.clone())
    } else if mu.dim() == l.ambient_dim() {
        mu.to_local(l)
    } else {
        Err(Error::DimensionMismatch { expected: l.dim(), found: mu.dim() })
    }
}

fn check_target(mu: &SphericalMeasure) -> Result<()> {
    if !mu.is_even(1e-9 * mu.total_mass()) {
        return Err(Error::NotSymmetric);
    }
    if !mu.spans() {
        return Err(Error::DegenerateSupport { rank: mu.support_rank(), dim: mu.dim() });
    }
    Ok(())
}

/// Solves in `l`, dispatching on its dimension.
pub fn solve_minkowski(mu: &SphericalMeasure, l: &Subspace, tol: f64) -> Result<MinkowskiSolution> {
    match l.dim() {
        2 => solve_minkowski_2d(mu, l),
        3 => solve_minkowski_iterative(mu, l, tol),
        k => Err(Error::InvalidParameter(format!("Minkowski problems are solved for k = 2, 3, got {k}"))),
    }
}

/// Exact planar solution: edges sorted by normal angle, each of length equal
/// to its atom's mass.
pub fn solve_minkowski_2d(mu: &SphericalMeasure, l: &Subspace) -> Result<MinkowskiSolution> {
    if l.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: l.dim() });
    }
    let mu = local_target(mu, l)?;
    check_target(&mu)?;
    let mut order: Vec<usize> = (0..mu.len()).collect();
    let angle = |i: usize| {
        let u = &mu.atoms()[i].dir;
        u[1].atan2(u[0])
    };
    order.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    // vertex i starts the edge with normal u_i; edge vector is m_i u_i rotated by +90°
    let mut verts = Vec::with_capacity(order.len());
    let mut p = [0.0, 0.0];
    for &i in &order {
        verts.push(p);
        let a = &mu.atoms()[i];
        p = [p[0] - a.mass * a.dir[1], p[1] + a.mass * a.dir[0]];
    }
    let n = verts.len() as f64;
    // for an o-symmetric polygon the vertex mean is the centre
    let c = verts.iter().fold([0.0, 0.0], |c, v| [c[0] + v[0] / n, c[1] + v[1] / n]);
    let reach = verts.iter().map(|v| (v[0] - c[0]).hypot(v[1] - c[1])).fold(0.0, f64::max);
    let cuts = order.iter().zip(&verts).map(|(&i, v)| {
        let u = mu.atoms()[i].dir.clone();
        let h = (v[0] - c[0]) * u[0] + (v[1] - c[1]) * u[1];
        (u, h, Label::Constraint(i))
    });
    let body = Polytope::from_local_cuts(l.clone(), DVector::zeros(l.ambient_dim()), cuts, 2.0 * reach + 1.0)?;
    finish(body, &mu, 1e-13, 0)
}

fn finish(body: Polytope, mu: &SphericalMeasure, tol: f64, iterations: usize) -> Result<MinkowskiSolution> {
    let facets = body.local_facets();
    let total: f64 = facets.iter().map(|f| f.measure).sum();
    let mut vanished = Vec::new();
    for i in 0..mu.len() {
        let present = facets.iter().any(|f| f.label == Label::Constraint(i) && f.measure >= TINY_FACET * total);
        if !present {
            vanished.push(i);
        }
    }
    let kept = facets.into_iter().filter(|f| f.measure >= TINY_FACET * total).map(|f| (f.normal, f.measure));
    let sam = SphericalMeasure::new(mu.dim(), kept)?;
    let residual = prokhorov(&sam, mu, tol)?;
    Ok(MinkowskiSolution { body, residual, iterations, vanished })
}

/// One antipodal pair of target atoms.
struct Pair {
    dir: DVector<f64>,
    mass: f64,
    plus: usize,
    minus: usize,
}

fn pairs(mu: &SphericalMeasure) -> Vec<Pair> {
    let atoms = mu.atoms();
    let mut out: Vec<Pair> = Vec::new();
    let mut used = vec![false; atoms.len()];
    for i in 0..atoms.len() {
        if used[i] {
            continue;
        }
        let j = (0..atoms.len())
            .find(|&j| !used[j] && j != i && (&atoms[i].dir + &atoms[j].dir).norm() < 1e-9)
            .expect("even measure");
        used[i] = true;
        used[j] = true;
        out.push(Pair { dir: atoms[i].dir.clone(), mass: 0.5 * (atoms[i].mass + atoms[j].mass), plus: i, minus: j });
    }
    out
}

/// State of the volume maximisation at support numbers `h` (one per pair).
struct Eval {
    body: Polytope,
    log_volume: f64,
    /// Facet area per target atom.
    areas: Vec<f64>,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

fn evaluate(mu: &SphericalMeasure, ps: &[Pair], h: &DVector<f64>, l: &Subspace, want_hess: bool) -> Option<Eval> {
    if h.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let cuts = ps.iter().zip(h.iter()).flat_map(|(p, &hp)| {
        [(p.dir.clone(), hp, Label::Constraint(p.plus)), (-&p.dir, hp, Label::Constraint(p.minus))]
    });
    let body = Polytope::from_local_cuts(l.clone(), DVector::zeros(l.ambient_dim()), cuts, 1e4 * h.max()).ok()?;
    if body.is_clipped() {
        return None;
    }
    let volume = body.volume();
    let n = mu.len();
    let mut areas = vec![0.0; n];
    for f in body.local_facets() {
        if let Label::Constraint(i) = f.label {
            areas[i] += f.measure;
        }
    }
    let m = ps.len();
    let grad = DVector::from_iterator(m, ps.iter().map(|p| (areas[p.plus] + areas[p.minus]) / volume));
    let mut hess = DMatrix::zeros(m, m);
    if want_hess {
        // ∂F_a/∂h_b = ℓ_ab / sin θ_ab for adjacent a ≠ b, ∂F_a/∂h_a = −Σ_b ℓ_ab cot θ_ab
        let mut pair_of = vec![0; n];
        for (q, p) in ps.iter().enumerate() {
            pair_of[p.plus] = q;
            pair_of[p.minus] = q;
        }
        let dirs: Vec<DVector<f64>> = mu.atoms().iter().map(|a| a.dir.clone()).collect();
        let mut raw = DMatrix::zeros(m, m);
        for (a, b, len) in body.ridges() {
            let (Label::Constraint(a), Label::Constraint(b)) = (a, b) else { continue };
            let cos = dirs[a].dot(&dirs[b]);
            let sin = dirs[a].cross(&dirs[b]).norm();
            if sin < 1e-12 {
                continue;
            }
            let (pa, pb) = (pair_of[a], pair_of[b]);
            raw[(pa, pb)] += len / sin;
            raw[(pb, pa)] += len / sin;
            raw[(pa, pa)] -= len * cos / sin;
            raw[(pb, pb)] -= len * cos / sin;
        }
        hess = raw / volume - &grad * grad.transpose();
    }
    Some(Eval { body, log_volume: volume.ln(), areas, grad, hess })
}

/// Relative facet-area mismatch `Σ_a |F_a/λ − μ_a|` with `λ = Σ h_a F_a`.
fn area_residual(mu: &SphericalMeasure, ps: &[Pair], h: &DVector<f64>, areas: &[f64]) -> f64 {
    let lambda: f64 = ps.iter().zip(h.iter()).map(|(p, &hp)| hp * (areas[p.plus] + areas[p.minus])).sum();
    mu.atoms().iter().zip(areas).map(|(a, &f)| (f / lambda - a.mass).abs()).sum()
}

/// Changes of `log V` below this are treated as rounding noise by the line
/// search.
const LOG_VOLUME_NOISE: f64 = 1e-11;

/// Three-dimensional solver started from the uniform support numbers
/// `h_i = 1/Σ μ_j`.
pub fn solve_minkowski_iterative(mu: &SphericalMeasure, l: &Subspace, tol: f64) -> Result<MinkowskiSolution> {
    solve_minkowski_iterative_from(mu, l, tol, None)
}

/// As [`solve_minkowski_iterative`], optionally starting from given positive
/// support numbers (one per atom of the frame-coordinate target; antipodal
/// values are averaged and the vector is rescaled onto the constraint).
pub fn solve_minkowski_iterative_from(
    mu: &SphericalMeasure,
    l: &Subspace,
    tol: f64,
    init: Option<&[f64]>,
) -> Result<MinkowskiSolution> {
    if l.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: l.dim() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mu = local_target(mu, l)?;
    check_target(&mu)?;
    let ps = pairs(&mu);
    let m = ps.len();
    let a = DVector::from_iterator(m, ps.iter().map(|p| 2.0 * p.mass));
    let mut h = match init {
        None => DVector::from_element(m, 1.0 / mu.total_mass()),
        Some(x) => {
            if x.len() != mu.len() || x.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::InvalidParameter("initial support numbers must be positive, one per atom".into()));
            }
            DVector::from_iterator(m, ps.iter().map(|p| 0.5 * (x[p.plus] + x[p.minus])))
        }
    };
    h /= a.dot(&h);
    let mut cur = evaluate(&mu, &ps, &h, l, true)
        .ok_or_else(|| Error::Degenerate("initial support numbers give an unbounded body".into()))?;
    let mut iterations = 0;
    let mut residual = area_residual(&mu, &ps, &h, &cur.areas);
    while iterations < MAX_ITERS {
        if residual <= 0.25 * tol {
            break;
        }
        iterations += 1;
        let dir = newton_direction(&cur, &a).unwrap_or_else(|| projected(&cur.grad, &a));
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &h + &dir * step;
            // compare volumes on the constraint surface
            let trial = &trial / a.dot(&trial);
            if let Some(e) = evaluate(&mu, &ps, &trial, l, true) {
                // near the optimum volume gains drown in rounding; the facet
                // area mismatch decides instead
                let flat = (e.log_volume - cur.log_volume).abs() <= LOG_VOLUME_NOISE;
                let better = if flat {
                    area_residual(&mu, &ps, &trial, &e.areas) < residual
                } else {
                    e.log_volume > cur.log_volume
                };
                if better {
                    accepted = Some((trial, e));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, e)) = accepted else { break };
        h = next;
        cur = e;
        residual = area_residual(&mu, &ps, &h, &cur.areas);
    }
    if residual > tol {
        return Err(Error::NonConvergence { iterations, residual });
    }
    // facet areas are λμ at the optimum with λ = Σ h_a F_a; scale by λ^{-1/2}
    let lambda: f64 = ps.iter().zip(h.iter()).map(|(p, &hp)| hp * (cur.areas[p.plus] + cur.areas[p.minus])).sum();
    let body = cur.body.scaled(lambda.powf(-0.5));
    let sol = finish(body, &mu, tol / 10.0, iterations)?;
    if sol.residual > tol {
        return Err(Error::NonConvergence { iterations, residual: sol.residual });
    }
    Ok(sol)
}

fn projected(g: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    g - a * (a.dot(g) / a.dot(a))
}

/// Newton step on `log V` restricted to `a·h = const`, from the KKT system.
fn newton_direction(e: &Eval, a: &DVector<f64>) -> Option<DVector<f64>> {
    let m = a.len();
    let mut kkt = DMatrix::zeros(m + 1, m + 1);
    kkt.view_mut((0, 0), (m, m)).copy_from(&e.hess);
    kkt.view_mut((0, m), (m, 1)).copy_from(a);
    kkt.view_mut((m, 0), (1, m)).copy_from(&a.transpose());
    let mut rhs = DVector::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(&(-&e.grad));
    let sol = kkt.full_piv_lu().solve(&rhs)?;
    let d = sol.rows(0, m).into_owned();
    // g is nearly parallel to a at the optimum, so test ascent against the
    // tangential part of g
    if d.iter().all(|x| x.is_finite()) && d.dot(&projected(&e.grad, a)) > 0.0 {
        Some(d)
    } else {
        None
    }
}

/// The Blaschke body `B_L` of the section process: the o-symmetric body with
/// `S_{k−1}(B_L, ·) = φ_{X∩L}`.
pub fn blaschke_body(spec: &ProcessSpec, l: &Subspace) -> Result<Polytope> {
    let s = section_params(spec, l)?;
    Ok(solve_minkowski(&s.phi_section, l, BLASCHKE_TOL)?.body)
}

/// The body `B(L)` with `S_{k−1}(B(L), ·) = π_L φ`.
pub fn body_b_of_l(spec: &ProcessSpec, l: &Subspace) -> Result<Polytope> {
    let target = spec.phi.project(l)?;
    Ok(solve_minkowski(&target, l, BLASCHKE_TOL)?.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::gaussian_vector;
    use crate::polytope::tests::random_symmetric_polytope;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn random_even<R: Rng>(d: usize, n: usize, rng: &mut R) -> SphericalMeasure {
        loop {
            let atoms: Vec<_> = (0..n).map(|_| (gaussian_vector(d, rng), rng.random_range(0.1..1.0))).collect();
            let m = SphericalMeasure::make_even(&atoms).unwrap();
            if m.spans() {
                return m;
            }
        }
    }

    #[test]
    fn square_and_hexagon() {
        let l = Subspace::whole(2);
        let mu = SphericalMeasure::make_even(&[(v(&[1.0, 0.0]), 1.0), (v(&[0.0, 1.0]), 1.0)]).unwrap();
        let s = solve_minkowski_2d(&mu, &l).unwrap();
        assert!((s.body.volume() - 0.25).abs() < 1e-15);
        assert!(s.residual <= 1e-12);
        assert!(s.body.is_o_symmetric(1e-12));

        let atoms: Vec<_> = [0.0f64, 120.0, 240.0].iter().map(|a| (v(&[a.to_radians().cos(), a.to_radians().sin()]), 1.0)).collect();
        let s = solve_minkowski_2d(&SphericalMeasure::make_even(&atoms).unwrap(), &l).unwrap();
        assert_eq!(s.body.vertices().len(), 6);
        let vs = s.body.vertices();
        for x in &vs {
            assert!((x.norm() - 0.5).abs() < 1e-14, "regular hexagon of edge 1/2 has circumradius 1/2");
        }
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn planar_scaling_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = Subspace::whole(2);
        let mu = random_even(2, 7, &mut rng);
        let a = solve_minkowski_2d(&mu, &l).unwrap().body;
        let b = solve_minkowski_2d(&mu.scaled(3.0), &l).unwrap().body;
        assert!((b.volume() - 9.0 * a.volume()).abs() < 1e-12 * b.volume());
        let u = gaussian_vector(2, &mut rng);
        assert!((b.support(&u) - 3.0 * a.support(&u)).abs() < 1e-12);
    }

    #[test]
    fn planar_errors() {
        let l = Subspace::whole(2);
        let line = SphericalMeasure::make_even(&[(v(&[1.0, 0.0]), 1.0)]).unwrap();
        assert!(matches!(solve_minkowski_2d(&line, &l), Err(Error::DegenerateSupport { .. })));
        let odd = SphericalMeasure::new(2, [(v(&[1.0, 0.0]), 1.0), (v(&[0.0, 1.0]), 1.0), (v(&[-1.0, -1.0]), 1.0)]).unwrap();
        assert_eq!(solve_minkowski_2d(&odd, &l).unwrap_err(), Error::NotSymmetric);
    }

    #[test]
    fn cube_target() {
        let l = Subspace::whole(3);
        let a = 0.7;
        let mu = SphericalMeasure::new(
            3,
            (0..3).flat_map(|i| {
                let e = crate::grassmann::unit(3, i);
                [(e.clone(), a), (-e, a)]
            }),
        )
        .unwrap();
        let s = solve_minkowski_iterative(&mu, &l, 1e-10).unwrap();
        assert!((s.body.volume() - a.powf(1.5)).abs() < 1e-8);
        assert!(s.residual <= 1e-10);
        assert!(s.body.is_o_symmetric(1e-9));
    }

    #[test]
    fn round_trip_of_a_random_symmetric_body() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = Subspace::whole(3);
        for _ in 0..3 {
            let q = random_symmetric_polytope(&l, 5, &mut rng);
            let mu = q.local_surface_area_measure();
            let s = solve_minkowski_iterative(&mu, &l, 1e-10).unwrap();
            assert!((s.body.volume() - q.volume()).abs() < 1e-6 * q.volume());
            for f in q.facets() {
                assert!((s.body.support(&f.normal) - f.offset).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn parallelepipeds_converge_to_tight_tolerance() {
        // few facets with widely spread areas: the gradient is almost normal
        // to the constraint at the optimum
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let l = Subspace::whole(3);
        for _ in 0..200 {
            let q = random_symmetric_polytope(&l, 3, &mut rng);
            let s = solve_minkowski_iterative(&q.local_surface_area_measure(), &l, BLASCHKE_TOL).unwrap();
            assert!((s.body.volume() - q.volume()).abs() < 1e-7 * q.volume());
        }
    }

    #[test]
    fn random_starts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = Subspace::whole(3);
        let mu = random_even(3, 6, &mut rng);
        let a = solve_minkowski_iterative(&mu, &l, 1e-10).unwrap().body;
        let init: Vec<f64> = (0..mu.len()).map(|_| rng.random_range(0.5..2.0)).collect();
        let b = solve_minkowski_iterative_from(&mu, &l, 1e-10, Some(&init)).unwrap().body;
        for _ in 0..20 {
            let u = gaussian_vector(3, &mut rng);
            assert!((a.support(&u) - b.support(&u)).abs() < 1e-7);
        }
    }

    #[test]
    fn three_dimensional_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = Subspace::random(4, 3, &mut rng);
        let mu = random_even(3, 5, &mut rng);
        let a = solve_minkowski_iterative(&mu, &l, 1e-10).unwrap().body;
        let b = solve_minkowski_iterative(&mu.scaled(4.0), &l, 1e-10).unwrap().body;
        let u = gaussian_vector(4, &mut rng);
        assert!((b.support(&u) - 2.0 * a.support(&u)).abs() < 1e-7);
        assert!(b.direction_space().approx_eq(&l));
    }

    #[test]
    fn blaschke_body_of_the_cross_measure() {
        let spec = ProcessSpec::new(1.0, SphericalMeasure::cross(3)).unwrap();
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let b = blaschke_body(&spec, &l).unwrap();
        assert!((b.volume() - 1.0 / 16.0).abs() < 1e-14);
        let small = body_b_of_l(&spec, &l).unwrap();
        assert!((small.volume() - 1.0 / 36.0).abs() < 1e-14);
        // B_L = (γ/γ_L)^{1/(k−1)} B(L) with ratio 3/2
        let u = v(&[0.3, 0.8, 0.0]);
        assert!((b.support(&u) - 1.5 * small.support(&u)).abs() < 1e-14);
    }

    #[test]
    fn projection_is_the_identity_for_measures_in_the_subspace() {
        let l = Subspace::coordinate(3, &[0, 2]).unwrap();
        let phi = SphericalMeasure::make_even(&[(v(&[1.0, 0.0, 0.0]), 0.5), (v(&[1.0, 0.0, 1.0]), 0.5)]).unwrap();
        let target = phi.project(&l).unwrap();
        assert!((target.total_mass() - 1.0).abs() < 1e-15);
        let a = solve_minkowski(&target, &l, 1e-8).unwrap().body;
        let b = solve_minkowski(&phi, &l, 1e-8).unwrap().body;
        assert!((a.volume() - b.volume()).abs() < 1e-15);
        assert!(a.is_o_symmetric(1e-12));
    }

    #[test]
    fn blaschke_bodies_are_symmetric_and_scale_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let phi = random_even(3, 5, &mut rng).normalized();
        let spec = ProcessSpec::new(2.0, phi.clone()).unwrap();
        let l = Subspace::random(3, 2, &mut rng);
        let b = blaschke_body(&spec, &l).unwrap();
        assert!(b.is_o_symmetric(1e-12));
        let small = body_b_of_l(&spec, &l).unwrap();
        let s = section_params(&spec, &l).unwrap();
        let ratio = spec.gamma / s.gamma_section;
        let u = l.from_local(&gaussian_vector(2, &mut rng));
        assert!((b.support(&u) - ratio * small.support(&u)).abs() < 1e-8);
        // Lemma-style lower bound on projections of B_L
        let m = phi.nondegeneracy().unwrap();
        let sam = b.surface_area_measure();
        for _ in 0..50 {
            let u = l.from_local(&gaussian_vector(2, &mut rng)).normalize();
            assert!(0.5 * sam.cosine_transform(&u) >= 0.5 * m - 1e-8);
        }
    }
}
