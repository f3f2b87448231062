//! The 2-faces of a plane arrangement in `R³` restricted to a cubic window.
//!
//! Each plane inherits a line arrangement from the others; its cells inside
//! the window trace are the 2-faces. Faces touching the window boundary are
//! kept but flagged, and statistics use only interior faces with
//! Miles–Lantuéjoul weights `1/V₃(W ⊖ F)`, which undo the size bias of
//! keeping only faces that fit in the window.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grassmann::Subspace;
use crate::polytope::planar::{Clip, Polygon};
use crate::polytope::{Halfspace, Label, Polytope, CLIP_SLACK};
use crate::process::{sample_hyperplanes, ProcessSpec};
use crate::{Error, Result};

/// Two lines in a plane closer than this (in normal and offset) mean three
/// planes share a line.
const DEGENERACY_TOL: f64 = 1e-9;

/// Resampling budget of [`sample_face_complex`] for degenerate draws.
const MAX_RESAMPLES: usize = 16;

/// A 2-face: a cell of `plane`'s line arrangement within the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub plane: usize,
    pub polytope: Polytope,
    /// No edge lies on the window boundary.
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceComplex {
    /// Half-width `W` of the window `[−W, W]³`.
    pub window: f64,
    pub planes: Vec<Halfspace>,
    pub faces: Vec<Face>,
}

/// Weighted sums over the interior faces of one window, `w` being the
/// Miles–Lantuéjoul weight. Sums from independent windows can be added.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowSums {
    pub count: usize,
    /// `Σ w`
    pub w: f64,
    /// `Σ w f`
    pub wf: f64,
    /// `Σ w V₂`
    pub wv: f64,
    /// `Σ w f V₂`
    pub wfv: f64,
}

impl WindowSums {
    pub fn add(&mut self, other: &WindowSums) {
        self.count += other.count;
        self.w += other.w;
        self.wf += other.wf;
        self.wv += other.wv;
        self.wfv += other.wfv;
    }

    /// Area-weighted mean of `f`: the weighted typical face.
    pub fn weighted_mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::NoInteriorFaces);
        }
        Ok(self.wfv / self.wv)
    }

    /// Plain mean of `f`: the typical face.
    pub fn typical_mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::NoInteriorFaces);
        }
        Ok(self.wf / self.w)
    }
}

/// Pooled edge-corrected means over independent windows with delta-method
/// standard errors of the ratio estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimate {
    pub faces: usize,
    pub windows: usize,
    pub typical: f64,
    pub typical_se: f64,
    pub weighted: f64,
    pub weighted_se: f64,
}

/// Combines per-window sums. At least two windows with interior faces are
/// needed for the standard errors.
pub fn pooled_estimate(windows: &[WindowSums]) -> Result<PooledEstimate> {
    let mut total = WindowSums::default();
    for w in windows {
        total.add(w);
    }
    let typical = total.typical_mean()?;
    let weighted = total.weighted_mean()?;
    let n = windows.len() as f64;
    let ratio_se = |num: &dyn Fn(&WindowSums) -> f64, den: &dyn Fn(&WindowSums) -> f64, r: f64| {
        if windows.len() < 2 {
            return f64::NAN;
        }
        let mean_den = windows.iter().map(den).sum::<f64>() / n;
        let ss: f64 = windows.iter().map(|w| (num(w) - r * den(w)).powi(2)).sum();
        (ss / (n * (n - 1.0))).sqrt() / mean_den
    };
    Ok(PooledEstimate {
        faces: total.count,
        windows: windows.len(),
        typical,
        typical_se: ratio_se(&|w| w.wf, &|w| w.w, typical),
        weighted,
        weighted_se: ratio_se(&|w| w.wfv, &|w| w.wv, weighted),
    })
}

/// Builds the 2-faces of the arrangement of the boundary planes of `planes`
/// inside `[−W, W]³`. Planes missing the window carry no faces.
pub fn build_face_complex(planes: &[Halfspace], window: f64) -> Result<FaceComplex> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidParameter(format!("window half-width must be positive, got {window}")));
    }
    if let Some(h) = planes.iter().find(|h| h.normal().len() != 3) {
        return Err(Error::DimensionMismatch { expected: 3, found: h.normal().len() });
    }
    let mut faces = Vec::new();
    for p in 0..planes.len() {
        for polytope in plane_cells(planes, p, window)? {
            let interior = !polytope.is_clipped();
            faces.push(Face { plane: p, polytope, interior });
        }
    }
    Ok(FaceComplex { window, planes: planes.to_vec(), faces })
}

/// Cells of the line arrangement that plane `p` inherits, inside the
/// window trace.
fn plane_cells(planes: &[Halfspace], p: usize, window: f64) -> Result<Vec<Polytope>> {
    let plane = &planes[p];
    let u = plane.normal();
    let carrier = Subspace::hyperplane(u)?;
    let anchor = u * plane.offset();
    let mut trace = Polygon::square(4.0 * window);
    for i in 0..3 {
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(3);
            e[i] = sign;
            let n = carrier.to_local(&e);
            let len = n.norm();
            let t = window - e.dot(&anchor);
            if len <= 1e-12 {
                if t <= 0.0 {
                    return Ok(Vec::new());
                }
                continue;
            }
            if trace.clip([n[0] / len, n[1] / len], t / len, Label::Bound, CLIP_SLACK) == Clip::Empty {
                return Ok(Vec::new());
            }
        }
    }
    let mut lines: Vec<([f64; 2], f64, usize)> = Vec::new();
    for (q, other) in planes.iter().enumerate() {
        if q == p {
            continue;
        }
        let n = carrier.to_local(other.normal());
        let len = n.norm();
        if len <= 1e-12 {
            continue;
        }
        let line = ([n[0] / len, n[1] / len], (other.offset() - other.normal().dot(&anchor)) / len, q);
        for (m, t, r) in &lines {
            let same = (m[0] - line.0[0]).abs() + (m[1] - line.0[1]).abs() + (t - line.1).abs();
            let opposite = (m[0] + line.0[0]).abs() + (m[1] + line.0[1]).abs() + (t + line.1).abs();
            if same.min(opposite) <= DEGENERACY_TOL * (1.0 + t.abs()) {
                return Err(Error::Degenerate(format!(
                    "planes {p}, {r} and {q} share a line; perturb or resample the configuration"
                )));
            }
        }
        lines.push(line);
    }
    let mut cells = vec![trace];
    for &(n, t, q) in &lines {
        let mut next = Vec::with_capacity(cells.len() + 4);
        for cell in cells {
            let mut below = cell.clone();
            match below.clip(n, t, Label::Constraint(q), CLIP_SLACK) {
                Clip::Unchanged | Clip::Empty => next.push(cell),
                Clip::Cut => {
                    let mut above = cell;
                    match above.clip([-n[0], -n[1]], -t, Label::Constraint(q), CLIP_SLACK) {
                        Clip::Cut => {
                            next.push(below);
                            next.push(above);
                        }
                        // a sliver below the clipping slack: keep one piece
                        _ => next.push(below),
                    }
                }
            }
        }
        cells = next;
    }
    Ok(cells.into_iter().map(|c| Polytope::from_polygon(carrier.clone(), anchor.clone(), c)).collect())
}

impl FaceComplex {
    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.interior)
    }

    /// Miles–Lantuéjoul weight `1/V₃(W ⊖ F)`: the reciprocal volume of the
    /// set of translates of `F` that fit in the window.
    pub fn edge_weight(&self, face: &Polytope) -> f64 {
        let vs = face.vertices();
        let mut vol = 1.0;
        for i in 0..3 {
            let (lo, hi) = vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[i]), b.max(v[i])));
            vol *= (2.0 * self.window - (hi - lo)).max(0.0);
        }
        if vol > 0.0 {
            1.0 / vol
        } else {
            0.0
        }
    }

    /// Faces as JSON-serialisable records, one per line when written out.
    pub fn records(&self) -> impl Iterator<Item = FaceRecord> + '_ {
        self.faces.iter().map(|f| FaceRecord {
            plane: f.plane,
            interior: f.interior,
            area: f.polytope.volume(),
            centroid: f.polytope.centroid().iter().copied().collect(),
            normal: self.planes[f.plane].normal().iter().copied().collect(),
            vertices: f.polytope.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
        })
    }
}

/// Flat description of a face for export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub plane: usize,
    pub interior: bool,
    pub area: f64,
    pub centroid: Vec<f64>,
    pub normal: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
}

/// Sums of a translation-invariant `f` over the interior faces.
pub fn window_sums(complex: &FaceComplex, f: impl Fn(&Polytope) -> f64) -> WindowSums {
    let mut s = WindowSums::default();
    for face in complex.interior_faces() {
        let w = complex.edge_weight(&face.polytope);
        if w == 0.0 {
            continue;
        }
        let v = face.polytope.volume();
        let fv = f(&face.polytope);
        s.count += 1;
        s.w += w;
        s.wf += w * fv;
        s.wv += w * v;
        s.wfv += w * fv * v;
    }
    s
}

/// `Σ f(F) V₂(F) / Σ V₂(F)` over interior faces (edge-corrected): an
/// estimate of `E f(Z₀⁽²⁾)` for the weighted typical face.
pub fn weighted_face_statistic(complex: &FaceComplex, f: impl Fn(&Polytope) -> f64) -> Result<f64> {
    window_sums(complex, f).weighted_mean()
}

/// Mean of `f` over interior faces (edge-corrected): an estimate of
/// `E f(Z⁽²⁾)` for the typical face.
pub fn typical_face_statistic(complex: &FaceComplex, f: impl Fn(&Polytope) -> f64) -> Result<f64> {
    window_sums(complex, f).typical_mean()
}

/// Samples the process in the ball circumscribing `[−W, W]³` and builds the
/// face complex, resampling degenerate draws.
pub fn sample_face_complex<R: Rng + ?Sized>(spec: &ProcessSpec, window: f64, rng: &mut R) -> Result<FaceComplex> {
    if spec.dim() != 3 {
        return Err(Error::InvalidParameter(format!("arrangements are built for d = 3, got {}", spec.dim())));
    }
    let radius = window * 3f64.sqrt();
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let planes = sample_hyperplanes(spec, radius, rng);
        match build_face_complex(&planes, window) {
            Err(e @ Error::Degenerate(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("loop ran at least once"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::unit;
    use crate::measures::SphericalMeasure;
    use crate::rng::substream;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_planes(n: usize, window: f64, rng: &mut ChaCha8Rng) -> Vec<Halfspace> {
        (0..n)
            .map(|_| {
                let u = crate::grassmann::gaussian_vector(3, rng);
                Halfspace::new(u, rng.random_range(0.0..window)).unwrap()
            })
            .collect()
    }

    /// Area of the window trace of a plane, by clipping it alone.
    fn trace_area(plane: &Halfspace, window: f64) -> f64 {
        plane_cells(std::slice::from_ref(plane), 0, window).unwrap().iter().map(|c| c.volume()).sum()
    }

    fn key(p: &DVector<f64>) -> (i64, i64, i64) {
        let q = |x: f64| (x * 1e7).round() as i64;
        (q(p[0]), q(p[1]), q(p[2]))
    }

    #[test]
    fn coordinate_planes() {
        let planes: Vec<Halfspace> = (0..3).map(|i| Halfspace::new(unit(3, i), 0.0).unwrap()).collect();
        let c = build_face_complex(&planes, 1.0).unwrap();
        assert_eq!(c.faces.len(), 12);
        assert!(c.faces.iter().all(|f| !f.interior));
        assert!(c.faces.iter().all(|f| (f.polytope.volume() - 1.0).abs() < 1e-12));
        for p in 0..3 {
            assert_eq!(c.faces.iter().filter(|f| f.plane == p).count(), 4);
        }
    }

    #[test]
    fn single_plane_is_its_trace() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plane = Halfspace::new(DVector::from_column_slice(&[s, s, 0.0]), 0.3).unwrap();
        let c = build_face_complex(std::slice::from_ref(&plane), 1.0).unwrap();
        assert_eq!(c.faces.len(), 1);
        assert!(!c.faces[0].interior);
        // a rectangle of height 2 and width along the chord of the square
        let chord = 2.0 * (2.0f64.sqrt() - 0.3);
        assert!((c.faces[0].polytope.volume() - 2.0 * chord).abs() < 1e-12);
    }

    #[test]
    fn missing_plane_has_no_faces() {
        let plane = Halfspace::new(unit(3, 0), 2.0).unwrap();
        let c = build_face_complex(&[plane], 1.0).unwrap();
        assert!(c.faces.is_empty());
    }

    #[test]
    fn shared_line_is_degenerate() {
        // three planes through the x₃-axis
        let planes: Vec<Halfspace> = [0.0f64, 1.0, 2.0]
            .iter()
            .map(|a| Halfspace::new(DVector::from_column_slice(&[a.cos(), a.sin(), 0.0]), 0.0).unwrap())
            .collect();
        assert!(matches!(build_face_complex(&planes, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn interior_cube_face() {
        // planes x_i = ±0.5 inside a window of half-width 1: the six faces
        // of the inner cube are interior
        let planes: Vec<Halfspace> = (0..3)
            .flat_map(|i| [Halfspace::new(unit(3, i), 0.5).unwrap(), Halfspace::new(-unit(3, i), 0.5).unwrap()])
            .collect();
        let c = build_face_complex(&planes, 1.0).unwrap();
        let interior: Vec<&Face> = c.interior_faces().collect();
        assert_eq!(interior.len(), 6);
        for f in &interior {
            assert!((f.polytope.volume() - 1.0).abs() < 1e-12);
            // translates fit in a 1 × 1 × 2 box: 1·1·2 = 2
            assert!((c.edge_weight(&f.polytope) - 0.5).abs() < 1e-12);
        }
        let s = window_sums(&c, |_| 1.0);
        assert_eq!(s.count, 6);
        assert!((weighted_face_statistic(&c, |p| p.volume()).unwrap() - 1.0).abs() < 1e-12);
        assert!((typical_face_statistic(&c, |_| 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn no_interior_faces_is_an_error() {
        let planes: Vec<Halfspace> = (0..3).map(|i| Halfspace::new(unit(3, i), 0.0).unwrap()).collect();
        let c = build_face_complex(&planes, 1.0).unwrap();
        assert_eq!(weighted_face_statistic(&c, |_| 1.0), Err(Error::NoInteriorFaces));
    }

    #[test]
    fn json_records_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = build_face_complex(&random_planes(6, 1.0, &mut rng), 1.0).unwrap();
        let lines: Vec<String> = c.records().map(|r| serde_json::to_string(&r).unwrap()).collect();
        assert_eq!(lines.len(), c.faces.len());
        let back: FaceRecord = serde_json::from_str(&lines[0]).unwrap();
        assert_eq!(back.plane, c.faces[0].plane);
    }

    #[test]
    fn cross_process_faces_are_rectangles_in_coordinate_planes() {
        let phi = SphericalMeasure::cross(3);
        let spec = ProcessSpec::new(3.0, phi).unwrap();
        let c = sample_face_complex(&spec, 3.0, &mut substream(5, 0)).unwrap();
        assert!(c.interior_faces().count() > 10);
        for f in c.interior_faces() {
            assert_eq!(f.polytope.vertices().len(), 4);
        }
    }

    #[test]
    fn edge_corrected_means_match_the_cross_section_cells() {
        // sections by coordinate planes are rectangular line tessellations
        // with side intensity γ/3: typical area (3/γ)², weighted area (6/γ)²
        let spec = ProcessSpec::new(3.0, SphericalMeasure::cross(3)).unwrap();
        let windows: Vec<WindowSums> = (0..40)
            .map(|i| window_sums(&sample_face_complex(&spec, 6.0, &mut substream(6, i)).unwrap(), |p| p.volume()))
            .collect();
        let est = pooled_estimate(&windows).unwrap();
        assert!(est.faces > 10_000);
        assert!((est.typical - 1.0).abs() < 4.0 * est.typical_se, "{est:?}");
        assert!((est.weighted - 4.0).abs() < 4.0 * est.weighted_se, "{est:?}");
        assert!(est.weighted_se < 0.2 * est.weighted, "{est:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn faces_tile_each_trace(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planes = random_planes(n, 1.2, &mut rng);
            let c = build_face_complex(&planes, 1.0).unwrap();
            for (p, plane) in planes.iter().enumerate() {
                let total: f64 = c.faces.iter().filter(|f| f.plane == p).map(|f| f.polytope.volume()).sum();
                let trace = trace_area(plane, 1.0);
                prop_assert!((total - trace).abs() <= 1e-6 * trace.max(1e-300), "{} vs {}", total, trace);
            }
        }

        #[test]
        fn faces_are_interior_disjoint(seed in any::<u64>(), n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planes = random_planes(n, 1.0, &mut rng);
            let c = build_face_complex(&planes, 1.0).unwrap();
            for (i, a) in c.faces.iter().enumerate() {
                for b in c.faces.iter().skip(i + 1).filter(|b| b.plane == a.plane) {
                    // the centroid of one lies strictly outside the other
                    prop_assert!(!b.polytope.contains(&a.polytope.centroid(), 1e-9));
                }
            }
        }

        #[test]
        fn euler_characteristic_per_plane(seed in any::<u64>(), n in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planes = random_planes(n, 1.0, &mut rng);
            let c = build_face_complex(&planes, 1.0).unwrap();
            for p in 0..planes.len() {
                let cells: Vec<&Face> = c.faces.iter().filter(|f| f.plane == p).collect();
                if cells.is_empty() {
                    continue;
                }
                let mut verts = HashSet::new();
                let mut edges = HashSet::new();
                for f in &cells {
                    let vs = f.polytope.vertices();
                    for (i, v) in vs.iter().enumerate() {
                        verts.insert(key(v));
                        let mid = (v + &vs[(i + 1) % vs.len()]) / 2.0;
                        edges.insert(key(&mid));
                    }
                }
                // boundary vertices of the trace plus the line arrangement
                let euler = verts.len() as i64 - edges.len() as i64 + cells.len() as i64;
                prop_assert_eq!(euler, 1);
            }
        }
    }
}
