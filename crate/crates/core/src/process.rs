//! Stationary Poisson hyperplane processes with atomic directional
//! distribution.
//!
//! The intensity measure is `Θ = 2γ ∫∫ 1{H(u, t) ∈ ·} dt φ(du)` over
//! `t > 0`, so the hyperplanes meeting the ball `rB` form a Poisson number
//! with mean `2γr`, with i.i.d. normals from `φ` and distances uniform on
//! `(0, r)`.

use nalgebra::DVector;
use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::grassmann::Subspace;
use crate::measures::{next_combination, SphericalMeasure};
use crate::polytope::{Halfspace, Label, Polytope};
use crate::{Error, Result};

/// Maximal number of radius doublings in the zero-cell construction.
pub const MAX_DOUBLINGS: usize = 40;

/// Intensity `γ` and directional distribution `φ` of a stationary Poisson
/// hyperplane process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireSpec", into = "WireSpec")]
pub struct ProcessSpec {
    pub gamma: f64,
    pub phi: SphericalMeasure,
}

#[derive(Serialize, Deserialize)]
struct WireSpec {
    gamma: f64,
    phi: SphericalMeasure,
}

impl TryFrom<WireSpec> for ProcessSpec {
    type Error = Error;
    fn try_from(w: WireSpec) -> Result<Self> {
        ProcessSpec::new(w.gamma, w.phi)
    }
}

impl From<ProcessSpec> for WireSpec {
    fn from(s: ProcessSpec) -> Self {
        WireSpec { gamma: s.gamma, phi: s.phi }
    }
}

impl ProcessSpec {
    /// Validates `γ > 0` and that `φ` is an even spanning probability measure.
    pub fn new(gamma: f64, phi: SphericalMeasure) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("intensity must be positive, got {gamma}")));
        }
        if (phi.total_mass() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "directional distribution must have mass 1, got {}",
                phi.total_mass()
            )));
        }
        if !phi.is_even(1e-12) {
            return Err(Error::NotSymmetric);
        }
        if !phi.spans() {
            return Err(Error::DegenerateSupport { rank: phi.support_rank(), dim: phi.dim() });
        }
        Ok(Self { gamma, phi })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }
}

/// Parameters of the section process `X ∩ L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub carrier: Subspace,
    pub gamma_section: f64,
    /// `φ_{X∩L}`, with directions in ambient coordinates.
    pub phi_section: SphericalMeasure,
}

impl SectionSpec {
    /// `φ_{X∩L}` in the frame coordinates of the carrier.
    pub fn local_phi(&self) -> SphericalMeasure {
        self.phi_section.to_local(&self.carrier).expect("section directions lie in the carrier")
    }
}

/// `γ_{X∩L} = γ ∫ ‖u|L‖ φ(du)` and `φ_{X∩L} = γ π_L φ / γ_{X∩L}`.
pub fn section_params(spec: &ProcessSpec, l: &Subspace) -> Result<SectionSpec> {
    let proj = spec.phi.project(l)?;
    if proj.is_empty() {
        return Err(Error::Degenerate("φ is concentrated on the orthogonal complement".into()));
    }
    let local = proj.to_local(l)?;
    if !local.spans() {
        return Err(Error::DegenerateSupport { rank: local.support_rank(), dim: l.dim() });
    }
    let ratio = proj.total_mass();
    Ok(SectionSpec { carrier: l.clone(), gamma_section: spec.gamma * ratio, phi_section: proj.scaled(1.0 / ratio) })
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

fn direction_sampler(phi: &SphericalMeasure) -> WeightedIndex<f64> {
    WeightedIndex::new(phi.atoms().iter().map(|a| a.mass)).expect("positive masses")
}

/// `(normal index, distance)` pairs of the hyperplanes with distance in
/// `(r0, r1)` from the origin.
fn sample_shell<R: Rng + ?Sized>(
    gamma: f64,
    phi: &SphericalMeasure,
    pick: &WeightedIndex<f64>,
    r0: f64,
    r1: f64,
    rng: &mut R,
) -> Vec<(usize, f64)> {
    let n = poisson(2.0 * gamma * (r1 - r0) * phi.total_mass(), rng);
    (0..n).map(|_| (pick.sample(rng), rng.random_range(r0..r1))).collect()
}

/// The hyperplanes of the process meeting `radius·B`, as the halfspaces
/// `H⁻(u, t)` containing the origin.
pub fn sample_hyperplanes<R: Rng + ?Sized>(spec: &ProcessSpec, radius: f64, rng: &mut R) -> Vec<Halfspace> {
    assert!(radius > 0.0, "radius must be positive");
    let pick = direction_sampler(&spec.phi);
    sample_shell(spec.gamma, &spec.phi, &pick, 0.0, radius, rng)
        .into_iter()
        .map(|(i, t)| Halfspace::new(spec.phi.atoms()[i].dir.clone(), t).expect("unit normal"))
        .collect()
}

/// Zero cell by adaptive radius doubling: hyperplanes are sampled on
/// `(0, R)`, and the cell is accepted once it lies in `(R/2)B`, so that no
/// hyperplane beyond `R` can meet it. Otherwise `R` doubles and the sample
/// is extended on `(R, 2R)`.
///
/// `phi` is the directional distribution in frame coordinates of `carrier`.
fn zero_cell_local<R: Rng + ?Sized>(gamma: f64, phi: &SphericalMeasure, carrier: &Subspace, rng: &mut R) -> Result<Polytope> {
    let pick = direction_sampler(phi);
    let mut radius = 4.0 / gamma;
    let mut planes = sample_shell(gamma, phi, &pick, 0.0, radius, rng);
    let anchor = DVector::zeros(carrier.ambient_dim());
    for _ in 0..=MAX_DOUBLINGS {
        planes.sort_by(|a, b| a.1.total_cmp(&b.1));
        let cuts = planes.iter().enumerate().map(|(j, &(i, t))| (phi.atoms()[i].dir.clone(), t, Label::Constraint(j)));
        let cell = Polytope::from_local_cuts(carrier.clone(), anchor.clone(), cuts, radius)?;
        if !cell.is_clipped() && cell.local_vertices().iter().all(|v| v.norm() <= radius / 2.0) {
            return Ok(cell);
        }
        planes.extend(sample_shell(gamma, phi, &pick, radius, 2.0 * radius, rng));
        radius *= 2.0;
    }
    Err(Error::UnboundedCell(MAX_DOUBLINGS))
}

/// The zero cell `Z₀` of the process.
pub fn zero_cell<R: Rng + ?Sized>(spec: &ProcessSpec, rng: &mut R) -> Result<Polytope> {
    let d = spec.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("zero cells are built for d = 2, 3, got {d}")));
    }
    zero_cell_local(spec.gamma, &spec.phi, &Subspace::whole(d), rng)
}

/// Intersection of given halfspaces containing the origin, required to be
/// bounded.
pub fn zero_cell_from_halfspaces(l: &Subspace, hs: &[Halfspace]) -> Result<Polytope> {
    let reach = hs.iter().map(|h| h.offset().abs()).fold(1.0, f64::max);
    let cell = Polytope::intersect_halfspaces(l, hs, 1e6 * reach)?;
    if cell.is_clipped() {
        return Err(Error::UnboundedCell(0));
    }
    Ok(cell)
}

/// The zero cell of the section process `X ∩ L`, sampled directly from
/// its parameters.
pub fn zero_cell_in_section<R: Rng + ?Sized>(spec: &ProcessSpec, l: &Subspace, rng: &mut R) -> Result<Polytope> {
    let s = section_params(spec, l)?;
    zero_cell_of_section(&s, rng)
}

/// As [`zero_cell_in_section`] with precomputed section parameters.
pub fn zero_cell_of_section<R: Rng + ?Sized>(s: &SectionSpec, rng: &mut R) -> Result<Polytope> {
    zero_cell_local(s.gamma_section, &s.local_phi(), &s.carrier, rng)
}

/// `Z₀ ∩ L`, computed by intersecting the ambient process with `L`.
pub fn section_of_zero_cell<R: Rng + ?Sized>(spec: &ProcessSpec, l: &Subspace, rng: &mut R) -> Result<Polytope> {
    let pick = direction_sampler(&spec.phi);
    let mut radius = 4.0 / spec.gamma;
    let mut planes = sample_shell(spec.gamma, &spec.phi, &pick, 0.0, radius, rng);
    for _ in 0..=MAX_DOUBLINGS {
        planes.sort_by(|a, b| a.1.total_cmp(&b.1));
        let hs: Vec<Halfspace> = planes
            .iter()
            .map(|&(i, t)| Halfspace::new(spec.phi.atoms()[i].dir.clone(), t).expect("unit normal"))
            .collect();
        let cell = Polytope::intersect_halfspaces(l, &hs, radius)?;
        if !cell.is_clipped() && cell.local_vertices().iter().all(|v| v.norm() <= radius / 2.0) {
            return Ok(cell);
        }
        planes.extend(sample_shell(spec.gamma, &spec.phi, &pick, radius, 2.0 * radius, rng));
        radius *= 2.0;
    }
    Err(Error::UnboundedCell(MAX_DOUBLINGS))
}

/// Number of hyperplanes of `X` whose trace on `L` meets the disc (ball)
/// of radius `r` in `L`; Poisson with mean `2 γ_{X∩L} r`.
pub fn count_section_hits<R: Rng + ?Sized>(spec: &ProcessSpec, l: &Subspace, r: f64, rng: &mut R) -> usize {
    sample_hyperplanes(spec, r, rng)
        .iter()
        .filter(|h| h.offset() < r * l.project(h.normal()).norm())
        .count()
}

/// A finite distribution on `G(d, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatDistribution {
    pub entries: Vec<(Subspace, f64)>,
}

impl FlatDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Subspace {
        let w = WeightedIndex::new(self.entries.iter().map(|e| e.1)).expect("positive weights");
        &self.entries[w.sample(rng)].0
    }

    /// Weight of `l` (0 if `l` is not in the support).
    pub fn weight_of(&self, l: &Subspace) -> f64 {
        self.entries.iter().filter(|e| e.0.approx_eq(l)).map(|e| e.1).sum()
    }

    pub fn contains(&self, l: &Subspace) -> bool {
        self.entries.iter().any(|e| e.0.approx_eq(l))
    }

    /// Total variation distance `½ Σ |p − q|` over the union of supports.
    pub fn total_variation(&self, other: &FlatDistribution) -> f64 {
        let mut tv = 0.0;
        for (l, w) in &self.entries {
            tv += (w - other.weight_of(l)).abs();
        }
        for (l, w) in &other.entries {
            if !self.contains(l) {
                tv += w;
            }
        }
        0.5 * tv
    }

    fn push(&mut self, l: Subspace, w: f64) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.0.approx_eq(&l)) {
            e.1 += w;
        } else {
            self.entries.push((l, w));
        }
    }

    fn normalize(&mut self) {
        let s: f64 = self.entries.iter().map(|e| e.1).sum();
        for e in &mut self.entries {
            e.1 /= s;
        }
    }
}

/// The flat `u_1^⊥ ∩ … ∩ u_j^⊥`; hyperplanes get the canonical frame.
fn flat_orthogonal_to(us: &[&DVector<f64>]) -> Result<Subspace> {
    if us.len() == 1 {
        return Subspace::hyperplane(us[0]);
    }
    let owned: Vec<DVector<f64>> = us.iter().map(|u| (*u).clone()).collect();
    Subspace::span(&owned)?.complement().ok_or_else(|| Error::Degenerate("normals span the whole space".into()))
}

/// `(d−k)`-volume of the parallelepiped spanned by `us`.
fn parallelepiped(us: &[&DVector<f64>]) -> f64 {
    let m = nalgebra::DMatrix::from_columns(&us.iter().map(|u| (*u).clone()).collect::<Vec<_>>());
    (m.transpose() * &m).determinant().max(0.0).sqrt()
}

/// Directional distribution `Q_{d−k}` of the intersection process of order
/// `d − k`: the flat `⋂ u_i^⊥` of `d − k` distinct normal directions gets
/// weight proportional to the product of their masses times the volume of
/// the parallelepiped they span.
pub fn intersection_direction_distribution(spec: &ProcessSpec, k: usize) -> Result<FlatDistribution> {
    let d = spec.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!("flat dimension must be in 1..{d}, got {k}")));
    }
    let j = d - k;
    // one representative per antipodal pair, carrying the pair's mass
    let mut axes: Vec<(DVector<f64>, f64)> = Vec::new();
    for a in spec.phi.atoms() {
        if let Some(x) = axes.iter_mut().find(|x| (&x.0 - &a.dir).norm() < 1e-9 || (&x.0 + &a.dir).norm() < 1e-9) {
            x.1 += a.mass;
        } else {
            axes.push((a.dir.clone(), a.mass));
        }
    }
    // canonical sign: first nonzero coordinate positive
    for x in &mut axes {
        if let Some(&c) = x.0.iter().find(|c| c.abs() > 1e-12) {
            if c < 0.0 {
                x.0 = -&x.0;
            }
        }
    }
    let mut out = FlatDistribution { entries: Vec::new() };
    if axes.len() < j {
        return Err(Error::Degenerate("fewer normal directions than the intersection order".into()));
    }
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        let us: Vec<&DVector<f64>> = idx.iter().map(|&i| &axes[i].0).collect();
        let vol = parallelepiped(&us);
        if vol > 1e-12 {
            let w: f64 = idx.iter().map(|&i| axes[i].1).product::<f64>() * vol;
            out.push(flat_orthogonal_to(&us)?, w);
        }
        if !next_combination(&mut idx, axes.len()) {
            break;
        }
    }
    if out.entries.is_empty() {
        return Err(Error::Degenerate("all subsets of normals are linearly dependent".into()));
    }
    out.normalize();
    Ok(out)
}

/// Monte Carlo estimate of `Q_{d−k}`: tuples of `d − k` independent
/// hyperplanes meeting `radius·B` are intersected, and each flat direction is
/// weighted by the `k`-volume of the flat inside the ball.
pub fn empirical_flat_distribution<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    k: usize,
    radius: f64,
    tuples: usize,
    rng: &mut R,
) -> Result<FlatDistribution> {
    let d = spec.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!("flat dimension must be in 1..{d}, got {k}")));
    }
    let j = d - k;
    let pick = direction_sampler(&spec.phi);
    let mut out = FlatDistribution { entries: Vec::new() };
    // cache flats by the sorted tuple of atom indices
    let mut cache: Vec<(Vec<usize>, Option<Subspace>)> = Vec::new();
    for _ in 0..tuples {
        let planes: Vec<(usize, f64)> = (0..j).map(|_| (pick.sample(rng), rng.random_range(-radius..radius))).collect();
        let us: Vec<&DVector<f64>> = planes.iter().map(|p| &spec.phi.atoms()[p.0].dir).collect();
        let m = nalgebra::DMatrix::from_columns(&us.iter().map(|u| (*u).clone()).collect::<Vec<_>>());
        let gram = m.transpose() * &m;
        let Some(inv) = gram.clone().try_inverse() else { continue };
        if gram.determinant() < 1e-12 {
            continue;
        }
        // closest point of the flat to o is m·gram⁻¹·t
        let t = DVector::from_iterator(j, planes.iter().map(|p| p.1));
        let dist2 = t.dot(&(&inv * &t));
        if dist2 >= radius * radius {
            continue;
        }
        let w = (radius * radius - dist2).powf(k as f64 / 2.0);
        let mut key: Vec<usize> = planes.iter().map(|p| p.0).collect();
        key.sort_unstable();
        let flat = match cache.iter().find(|c| c.0 == key) {
            Some(c) => c.1.clone(),
            None => {
                let f = flat_orthogonal_to(&us).ok();
                cache.push((key, f.clone()));
                f
            }
        };
        if let Some(f) = flat {
            out.push(f, w);
        }
    }
    if out.entries.is_empty() {
        return Err(Error::Degenerate("no tuple met the ball".into()));
    }
    out.normalize();
    Ok(out)
}

/// Draws weighted typical `k`-faces: a direction `L ~ Q_{d−k}`, then the
/// zero cell of the section process in `L`.
#[derive(Clone, Debug)]
pub struct FaceSampler {
    pub flats: FlatDistribution,
    pub sections: Vec<SectionSpec>,
    pick: WeightedIndex<f64>,
}

impl FaceSampler {
    pub fn new(spec: &ProcessSpec, k: usize) -> Result<Self> {
        let flats = intersection_direction_distribution(spec, k)?;
        let sections = flats.entries.iter().map(|(l, _)| section_params(spec, l)).collect::<Result<_>>()?;
        let pick = WeightedIndex::new(flats.entries.iter().map(|e| e.1)).expect("positive weights");
        Ok(Self { flats, sections, pick })
    }

    /// Index of a flat drawn from `Q_{d−k}`.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.pick.sample(rng)
    }

    /// Zero cell of the section process in flat `i`.
    pub fn face_in<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<Polytope> {
        zero_cell_of_section(&self.sections[i], rng)
    }

    /// Index of the sampled flat together with the face.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, Polytope)> {
        let i = self.pick(rng);
        Ok((i, self.face_in(i, rng)?))
    }
}

/// One weighted typical `k`-face `Z₀^{(k)}`.
pub fn sample_weighted_typical_face<R: Rng + ?Sized>(spec: &ProcessSpec, k: usize, rng: &mut R) -> Result<Polytope> {
    Ok(FaceSampler::new(spec, k)?.sample(rng)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{gaussian_vector, unit};
    use crate::rng::substream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn cross_spec(gamma: f64) -> ProcessSpec {
        ProcessSpec::new(gamma, SphericalMeasure::cross(3)).unwrap()
    }

    fn asymmetric_spec() -> ProcessSpec {
        let phi = SphericalMeasure::make_even(&[(unit(3, 0), 0.6), (unit(3, 1), 0.2), (unit(3, 2), 0.2)]).unwrap();
        ProcessSpec::new(1.0, phi).unwrap()
    }

    fn ks_uniform(xs: &mut [f64], hi: f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x / hi;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn spec_validation_and_json() {
        assert!(ProcessSpec::new(0.0, SphericalMeasure::cross(3)).is_err());
        assert!(ProcessSpec::new(1.0, SphericalMeasure::cross(3).scaled(2.0)).is_err());
        let flat = SphericalMeasure::make_even(&[(unit(3, 0), 0.5), (unit(3, 1), 0.5)]).unwrap();
        assert!(matches!(ProcessSpec::new(1.0, flat), Err(Error::DegenerateSupport { .. })));
        let s = cross_spec(2.5);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("{\"gamma\":2.5,\"phi\":{\"dim\":3"));
        let back: ProcessSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ProcessSpec>(&json.replace("2.5", "-1.0")).is_err());
    }

    #[test]
    fn section_of_the_cross_measure() {
        let s = section_params(&cross_spec(3.0), &Subspace::coordinate(3, &[0, 1]).unwrap()).unwrap();
        assert!((s.gamma_section - 2.0).abs() < 1e-15);
        assert_eq!(s.phi_section.len(), 4);
        assert!(s.phi_section.atoms().iter().all(|a| (a.mass - 0.25).abs() < 1e-15));
    }

    #[test]
    fn section_ratio_is_bracketed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let atoms: Vec<_> = (0..5).map(|_| (gaussian_vector(3, &mut rng), rng.random_range(0.1..1.0))).collect();
            let phi = SphericalMeasure::make_even(&atoms).unwrap().normalized();
            let spec = ProcessSpec::new(1.0, phi.clone()).unwrap();
            let l = Subspace::random(3, 2, &mut rng);
            let s = section_params(&spec, &l).unwrap();
            let m = phi.nondegeneracy().unwrap();
            assert!(m <= s.gamma_section + 1e-10 && s.gamma_section <= 1.0 + 1e-10);
            assert!((s.phi_section.total_mass() - 1.0).abs() < 1e-10);
        }
        // φ inside L
        let phi = SphericalMeasure::make_even(&[(unit(3, 0), 0.5), (unit(3, 1), 0.3), (v(&[0.0, 0.6, 0.8]), 0.2)]).unwrap();
        let spec = ProcessSpec::new(1.0, phi).unwrap();
        let s = section_params(&spec, &Subspace::whole(3)).unwrap();
        assert!((s.gamma_section - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hyperplane_counts_and_laws() {
        let spec = asymmetric_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reps = 2000;
        let mut total = 0usize;
        let mut ts = Vec::new();
        let mut counts = [0usize; 3];
        for _ in 0..reps {
            let hs = sample_hyperplanes(&spec, 5.0, &mut rng);
            total += hs.len();
            for h in hs {
                ts.push(h.offset());
                let axis = (0..3).find(|&i| h.normal()[i].abs() > 0.5).unwrap();
                counts[axis] += 1;
            }
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 10.0).abs() < 3.0 * (10.0 / reps as f64).sqrt(), "{mean}");
        let n = ts.len() as f64;
        let ks = ks_uniform(&mut ts, 5.0);
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
        let expected = [0.6, 0.2, 0.2];
        let chi2: f64 = counts.iter().zip(expected).map(|(&c, p)| (c as f64 - n * p).powi(2) / (n * p)).sum();
        assert!(1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2) > 0.01, "χ² = {chi2}");
    }

    #[test]
    fn injected_halfspaces_give_the_cube() {
        let hs: Vec<Halfspace> =
            (0..3).flat_map(|i| [Halfspace::new(unit(3, i), 1.0).unwrap(), Halfspace::new(-unit(3, i), 1.0).unwrap()]).collect();
        let c = zero_cell_from_halfspaces(&Subspace::whole(3), &hs).unwrap();
        assert!((c.volume() - 8.0).abs() < 1e-12);
        assert_eq!(zero_cell_from_halfspaces(&Subspace::whole(3), &hs[..5]), Err(Error::UnboundedCell(0)));
    }

    #[test]
    fn zero_cells_contain_the_origin() {
        let spec = asymmetric_spec();
        for i in 0..200 {
            let mut rng = substream(11, i);
            let c = zero_cell(&spec, &mut rng).unwrap();
            assert!(c.contains(&DVector::zeros(3), 0.0));
            assert!(c.volume() > 0.0);
        }
    }

    #[test]
    fn cross_section_cell_has_gamma_rectangle_mean_area() {
        // Z₀ ∩ span(e₁, e₂) is a rectangle with Gamma(2, γ/3) side lengths,
        // so E V₂ = (6/γ)².
        let spec = cross_spec(1.0);
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let n = 4000;
        let areas: Vec<f64> = (0..n).map(|i| zero_cell_in_section(&spec, &l, &mut substream(5, i)).unwrap().volume()).collect();
        let mean = areas.iter().sum::<f64>() / n as f64;
        let var = areas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 36.0).abs() < 3.5 * (var / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn flat_distribution_examples() {
        let cross = cross_spec(1.0);
        let q = intersection_direction_distribution(&cross, 2).unwrap();
        assert_eq!(q.entries.len(), 3);
        for i in 0..3 {
            assert!((q.weight_of(&Subspace::hyperplane(&unit(3, i)).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        }
        let asym = asymmetric_spec();
        let lines = intersection_direction_distribution(&asym, 1).unwrap();
        let w: Vec<f64> = (0..3).map(|i| lines.weight_of(&Subspace::coordinate(3, &[i]).unwrap())).collect();
        assert!((w[0] - 1.0 / 7.0).abs() < 1e-15 && (w[1] - 3.0 / 7.0).abs() < 1e-15 && (w[2] - 3.0 / 7.0).abs() < 1e-15);
        let planes = intersection_direction_distribution(&asym, 2).unwrap();
        assert!((planes.weight_of(&Subspace::hyperplane(&unit(3, 0)).unwrap()) - 0.6).abs() < 1e-15);
        assert!(intersection_direction_distribution(&asym, 3).is_err());
    }

    #[test]
    fn flat_distribution_matches_counting() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let asym = asymmetric_spec();
        for k in [1, 2] {
            let exact = intersection_direction_distribution(&asym, k).unwrap();
            let mc = empirical_flat_distribution(&asym, k, 1.0, 20_000, &mut rng).unwrap();
            assert!(exact.total_variation(&mc) < 0.02, "k={k}: {}", exact.total_variation(&mc));
        }
    }

    #[test]
    fn weighted_typical_faces_live_on_support_flats() {
        let spec = cross_spec(1.0);
        let sampler = FaceSampler::new(&spec, 2).unwrap();
        let mut counts = [0usize; 3];
        let n = 3000;
        for i in 0..n {
            let (j, f) = sampler.sample(&mut substream(3, i)).unwrap();
            assert!(sampler.flats.contains(f.direction_space()));
            counts[j] += 1;
        }
        let e = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2) > 0.01, "χ² = {chi2}");
    }

    #[test]
    fn section_hits_have_the_section_intensity() {
        let spec = cross_spec(2.0);
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let n = 4000;
        let r = 1.5;
        let total: usize = (0..n).map(|i| count_section_hits(&spec, &l, r, &mut substream(9, i))).sum();
        let mean = 2.0 * (2.0 * 2.0 / 3.0) * r;
        let got = total as f64 / n as f64;
        assert!((got - mean).abs() < 3.0 * (mean / n as f64).sqrt(), "{got} vs {mean}");
    }
}
