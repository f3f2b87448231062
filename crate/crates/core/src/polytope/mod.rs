//! Convex polytopes living in a linear subspace `L` (or a translate of it).
//!
//! A [`Polytope`] stores its geometry in the frame coordinates of its carrier
//! subspace, plus an `anchor` orthogonal to `L` for polytopes lying in an
//! affine translate `anchor + L`. Only `dim L ∈ {2, 3}` is supported.
//! Construction is by incremental clipping of a bounding box; every facet
//! remembers which input halfspace produced it.

pub(crate) mod planar;
mod solid;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grassmann::{Rotation, Subspace};
use crate::lp::LinearProgram;
use crate::measures::SphericalMeasure;
use crate::{Error, Result};

use planar::Polygon;
use solid::Polyhedron;

/// Vertices within this relative distance of a cutting plane are snapped
/// onto it.
pub const CLIP_SLACK: f64 = 1e-10;

/// Origin of a facet: a side of the initial bounding box, or the input
/// halfspace with the given index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Bound,
    Constraint(usize),
}

/// The closed halfspace `{x : ⟨x, normal⟩ ≤ offset}` with unit `normal`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireHalfspace", into = "WireHalfspace")]
pub struct Halfspace {
    normal: DVector<f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct WireHalfspace {
    normal: Vec<f64>,
    offset: f64,
}

impl TryFrom<WireHalfspace> for Halfspace {
    type Error = Error;
    fn try_from(w: WireHalfspace) -> Result<Self> {
        Halfspace::new(DVector::from_vec(w.normal), w.offset)
    }
}

impl From<Halfspace> for WireHalfspace {
    fn from(h: Halfspace) -> Self {
        WireHalfspace { normal: h.normal.iter().copied().collect(), offset: h.offset }
    }
}

impl Halfspace {
    /// `{x : ⟨x, n⟩ ≤ t}`; both sides are divided by `‖n‖`.
    pub fn new(normal: DVector<f64>, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroDirection);
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter(format!("halfspace offset {offset}")));
        }
        Ok(Self { normal: normal / n, offset: offset / n })
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.normal.dot(x) <= self.offset + tol
    }
}

/// A facet with its outward unit normal (ambient coordinates), offset,
/// `(k−1)`-volume and source label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    #[serde(with = "dvec")]
    pub normal: DVector<f64>,
    pub offset: f64,
    pub measure: f64,
    pub label: Label,
}

/// A facet in carrier frame coordinates.
#[derive(Clone, Debug)]
pub(crate) struct LocalFacet {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub measure: f64,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq)]
enum Geom {
    Planar(Polygon),
    Solid(Polyhedron),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    carrier: Subspace,
    anchor: DVector<f64>,
    geom: Geom,
}

/// Intersection of `hs` with the box `[−bound, bound]^k` in the frame
/// coordinates of `l`. Ambient halfspaces are restricted to `l`: a normal
/// orthogonal to `l` either imposes nothing or empties the result.
pub fn intersect_halfspaces(l: &Subspace, hs: &[Halfspace], bound: f64) -> Result<Polytope> {
    Polytope::intersect_halfspaces(l, hs, bound)
}

impl Polytope {
    pub fn intersect_halfspaces(l: &Subspace, hs: &[Halfspace], bound: f64) -> Result<Self> {
        let d = l.ambient_dim();
        let mut cuts = Vec::with_capacity(hs.len());
        for (i, h) in hs.iter().enumerate() {
            if h.normal.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: h.normal.len() });
            }
            let n = l.to_local(&h.normal);
            let len = n.norm();
            if len <= 1e-12 {
                if h.offset >= 0.0 {
                    continue;
                }
                return Err(Error::EmptyPolytope);
            }
            cuts.push((n / len, h.offset / len, Label::Constraint(i)));
        }
        Self::from_local_cuts(l.clone(), DVector::zeros(d), cuts, bound)
    }

    /// Clips `[−bound, bound]^k` by halfspaces given in frame coordinates of
    /// `carrier` (unit normals); the result is placed at `anchor + carrier`.
    pub(crate) fn from_local_cuts(
        carrier: Subspace,
        anchor: DVector<f64>,
        cuts: impl IntoIterator<Item = (DVector<f64>, f64, Label)>,
        bound: f64,
    ) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("bound must be positive, got {bound}")));
        }
        let k = carrier.dim();
        if !(2..=3).contains(&k) {
            return Err(Error::InvalidParameter(format!("polytopes need dimension 2 or 3, got {k}")));
        }
        let cuts: Vec<_> = cuts.into_iter().collect();
        if let Some((n, _, _)) = cuts.iter().find(|c| c.0.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, found: n.len() });
        }
        let mut geom = clip_box(k, &cuts, bound)?;
        // intersection points inherit rounding from the box corners, so a
        // box much larger than the result is replaced by a snug one
        let p = Self { carrier, anchor, geom: geom.clone() };
        if !p.is_clipped() {
            let reach = p.local_vertices().iter().map(|v| v.amax()).fold(0.0, f64::max);
            if 8.0 * reach < bound {
                geom = clip_box(k, &cuts, 2.0 * reach)?;
            }
        }
        Ok(Self { geom, ..p })
    }

    pub(crate) fn from_polygon(carrier: Subspace, anchor: DVector<f64>, polygon: Polygon) -> Self {
        debug_assert_eq!(carrier.dim(), 2);
        Self { carrier, anchor, geom: Geom::Planar(polygon) }
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.carrier.ambient_dim()
    }

    /// The direction space `lin(P − P)`, i.e. the carrier.
    pub fn direction_space(&self) -> &Subspace {
        &self.carrier
    }

    /// Offset of the affine hull from the carrier (orthogonal to it).
    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    /// Whether a side of the initial bounding box survived.
    pub fn is_clipped(&self) -> bool {
        self.local_facets().iter().any(|f| f.label == Label::Bound)
    }

    pub fn volume(&self) -> f64 {
        match &self.geom {
            Geom::Planar(p) => p.area(),
            Geom::Solid(p) => p.volume(),
        }
    }

    /// Vertices in frame coordinates; counter-clockwise for polygons.
    pub(crate) fn local_vertices(&self) -> Vec<DVector<f64>> {
        match &self.geom {
            Geom::Planar(p) => p.verts.iter().map(|v| DVector::from_column_slice(v)).collect(),
            Geom::Solid(p) => p.vertices(1e-12).iter().map(|v| DVector::from_column_slice(v)).collect(),
        }
    }

    fn local_scale(&self) -> f64 {
        match &self.geom {
            Geom::Planar(p) => p.verts.iter().fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs())),
            Geom::Solid(p) => p
                .faces
                .iter()
                .flat_map(|f| f.cycle.iter())
                .fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()).max(v[2].abs())),
        }
    }

    pub(crate) fn local_facets(&self) -> Vec<LocalFacet> {
        match &self.geom {
            Geom::Planar(p) => p
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| LocalFacet {
                    normal: DVector::from_column_slice(&e.normal),
                    offset: e.offset,
                    measure: p.edge_length(i),
                    label: e.label,
                })
                .collect(),
            Geom::Solid(p) => p
                .faces
                .iter()
                .map(|f| LocalFacet {
                    normal: DVector::from_column_slice(&f.normal),
                    offset: f.offset,
                    measure: f.area(),
                    label: f.label,
                })
                .collect(),
        }
    }

    pub fn vertices(&self) -> Vec<DVector<f64>> {
        self.local_vertices().iter().map(|y| &self.anchor + self.carrier.from_local(y)).collect()
    }

    pub fn facets(&self) -> Vec<Facet> {
        self.local_facets()
            .into_iter()
            .map(|f| {
                let normal = self.carrier.from_local(&f.normal);
                let offset = f.offset + normal.dot(&self.anchor);
                Facet { normal, offset, measure: f.measure, label: f.label }
            })
            .collect()
    }

    /// Support function `h(P, u) = max_v ⟨v, u⟩`; `u` is any ambient vector.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.vertices().iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `S_{k−1}(P, ·)` on the unit sphere of the carrier, with directions in
    /// ambient coordinates.
    pub fn surface_area_measure(&self) -> SphericalMeasure {
        SphericalMeasure::new(self.ambient_dim(), self.facets().into_iter().map(|f| (f.normal, f.measure)))
            .expect("facets have unit normals and positive measure")
    }

    /// `S_{k−1}(P, ·)` in frame coordinates, a measure on `S^{k−1}`.
    pub fn local_surface_area_measure(&self) -> SphericalMeasure {
        SphericalMeasure::new(self.dim(), self.local_facets().into_iter().map(|f| (f.normal, f.measure)))
            .expect("facets have unit normals and positive measure")
    }

    pub fn centroid(&self) -> DVector<f64> {
        let c = self.local_centroid();
        &self.anchor + self.carrier.from_local(&c)
    }

    pub(crate) fn local_centroid(&self) -> DVector<f64> {
        match &self.geom {
            Geom::Planar(p) => DVector::from_column_slice(&p.centroid()),
            Geom::Solid(p) => DVector::from_column_slice(&p.centroid()),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        let rel = x - &self.anchor;
        if !self.carrier.contains(&rel, tol) {
            return false;
        }
        let y = self.carrier.to_local(&rel);
        self.local_facets().iter().all(|f| f.normal.dot(&y) <= f.offset + tol)
    }

    /// Whether the vertex set is closed under `x ↦ −x` within `tol`
    /// (relative to the size of the body).
    pub fn is_o_symmetric(&self, tol: f64) -> bool {
        let scale = self.local_scale();
        if self.anchor.norm() > tol * scale {
            return false;
        }
        let vs = self.local_vertices();
        vs.iter().all(|v| vs.iter().any(|w| (v + w).norm() <= tol * scale))
    }

    /// Inradius and circumradius. For o-symmetric bodies both are taken about
    /// `o`; otherwise the inball is the Chebyshev ball of the facet system and
    /// `R` is measured from its centre.
    pub fn inradius_circumradius(&self) -> (f64, f64) {
        let facets = self.local_facets();
        let verts = self.local_vertices();
        if self.is_o_symmetric(1e-9) {
            let r = facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
            let big_r = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
            return (r, big_r);
        }
        let k = self.dim();
        let c0 = self.local_centroid();
        let reach = verts.iter().map(|v| (v - &c0).norm()).fold(0.0, f64::max);
        // variables: centre shift from the centroid, then r; maximise r
        let mut c = vec![0.0; k + 1];
        c[k] = -1.0;
        let mut bounds = vec![(-reach, reach); k];
        bounds.push((0.0, reach));
        let rows = facets
            .iter()
            .map(|f| {
                let mut a: Vec<f64> = f.normal.iter().copied().collect();
                a.push(1.0);
                (a, f.offset - f.normal.dot(&c0))
            })
            .collect();
        let lp = LinearProgram { c, bounds, rows };
        let (centre, r) = match lp.solve() {
            Ok(x) => (&c0 + DVector::from_column_slice(&x[..k]), x[k]),
            Err(_) => {
                // the centroid is always feasible with its own minimal slack
                let r = facets.iter().map(|f| f.offset - f.normal.dot(&c0)).fold(f64::INFINITY, f64::min);
                (c0.clone(), r)
            }
        };
        let big_r = verts.iter().map(|v| (v - &centre).norm()).fold(0.0, f64::max);
        (r, big_r)
    }

    /// `P + z`.
    pub fn translated(&self, z: &DVector<f64>) -> Self {
        let shift = self.carrier.to_local(z);
        let perp = z - self.carrier.from_local(&shift);
        let geom = match &self.geom {
            Geom::Planar(p) => Geom::Planar(p.transformed([[1.0, 0.0], [0.0, 1.0]], [shift[0], shift[1]])),
            Geom::Solid(p) => Geom::Solid(p.transformed(identity3(), 1.0, [shift[0], shift[1], shift[2]])),
        };
        Self { carrier: self.carrier.clone(), anchor: &self.anchor + perp, geom }
    }

    /// `λP` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0, "scale factor must be positive");
        let geom = match &self.geom {
            Geom::Planar(p) => Geom::Planar(p.transformed([[lambda, 0.0], [0.0, lambda]], [0.0, 0.0])),
            Geom::Solid(p) => Geom::Solid(p.transformed(identity3(), lambda, [0.0; 3])),
        };
        Self { carrier: self.carrier.clone(), anchor: &self.anchor * lambda, geom }
    }

    /// `−P`.
    pub fn reflected(&self) -> Self {
        let geom = match &self.geom {
            Geom::Planar(p) => Geom::Planar(p.transformed([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])),
            Geom::Solid(p) => {
                Geom::Solid(p.transformed([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]], 1.0, [0.0; 3]))
            }
        };
        Self { carrier: self.carrier.clone(), anchor: -&self.anchor, geom }
    }

    /// `ρP`, with carrier `ρL`. Frame coordinates are unchanged.
    pub fn rotated(&self, rho: &Rotation) -> Self {
        Self { carrier: self.carrier.rotated(rho), anchor: rho.apply(&self.anchor), geom: self.geom.clone() }
    }

    /// The same set expressed in the frame of `target`, which must equal the
    /// carrier as a subspace.
    pub fn in_frame(&self, target: &Subspace) -> Result<Self> {
        if target.ambient_dim() != self.ambient_dim() || target.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: target.dim() });
        }
        let t: DMatrix<f64> = target.frame().transpose() * self.carrier.frame();
        let err = (&t * t.transpose() - DMatrix::<f64>::identity(self.dim(), self.dim())).amax();
        if err > 1e-8 {
            return Err(Error::InvalidParameter("target frame spans a different subspace".into()));
        }
        // re-orthogonalise to avoid drift
        let qr = t.qr();
        let r_diag = qr.r().diagonal();
        let mut t = qr.q();
        for (j, r) in r_diag.iter().enumerate() {
            if *r < 0.0 {
                t.column_mut(j).neg_mut();
            }
        }
        let geom = match &self.geom {
            Geom::Planar(p) => Geom::Planar(p.transformed([[t[(0, 0)], t[(0, 1)]], [t[(1, 0)], t[(1, 1)]]], [0.0, 0.0])),
            Geom::Solid(p) => {
                let m = [
                    [t[(0, 0)], t[(0, 1)], t[(0, 2)]],
                    [t[(1, 0)], t[(1, 1)], t[(1, 2)]],
                    [t[(2, 0)], t[(2, 1)], t[(2, 2)]],
                ];
                Geom::Solid(p.transformed(m, 1.0, [0.0; 3]))
            }
        };
        Ok(Self { carrier: target.clone(), anchor: self.anchor.clone(), geom })
    }

    /// Pairs of adjacent facets (by label) with the `(k−2)`-volume of their
    /// intersection: a common edge length for solids, `1` for polygon corners.
    pub(crate) fn ridges(&self) -> Vec<(Label, Label, f64)> {
        match &self.geom {
            Geom::Planar(p) => {
                let n = p.edges.len();
                (0..n).map(|i| (p.edges[i].label, p.edges[(i + 1) % n].label, 1.0)).collect()
            }
            Geom::Solid(p) => p.edges().into_iter().map(|(i, j, l)| (p.faces[i].label, p.faces[j].label, l)).collect(),
        }
    }

    /// Polygon vertices in frame coordinates, counter-clockwise. `None` for
    /// solids.
    pub fn polygon_outline(&self) -> Option<Vec<[f64; 2]>> {
        match &self.geom {
            Geom::Planar(p) => Some(p.verts.clone()),
            Geom::Solid(_) => None,
        }
    }

    /// Facet cycles of a solid in frame coordinates. `None` for polygons.
    pub fn solid_faces(&self) -> Option<Vec<Vec<[f64; 3]>>> {
        match &self.geom {
            Geom::Planar(_) => None,
            Geom::Solid(p) => Some(p.faces.iter().map(|f| f.cycle.clone()).collect()),
        }
    }
}

fn clip_box(k: usize, cuts: &[(DVector<f64>, f64, Label)], bound: f64) -> Result<Geom> {
    let mut geom = if k == 2 { Geom::Planar(Polygon::square(bound)) } else { Geom::Solid(Polyhedron::cube(bound)) };
    for (n, t, label) in cuts {
        let empty = match &mut geom {
            Geom::Planar(p) => p.clip([n[0], n[1]], *t, *label, CLIP_SLACK) == planar::Clip::Empty,
            Geom::Solid(p) => p.clip([n[0], n[1], n[2]], *t, *label, CLIP_SLACK) == solid::Clip::Empty,
        };
        if empty {
            return Err(Error::EmptyPolytope);
        }
    }
    Ok(geom)
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

mod dvec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

#[derive(Serialize, Deserialize)]
struct WirePolytope {
    carrier: Subspace,
    anchor: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WirePolytope {
            carrier: self.carrier.clone(),
            anchor: self.anchor.iter().copied().collect(),
            vertices: self.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
            facets: self.facets(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    /// Rebuilds the body from its facet halfspaces; vertices are informative.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WirePolytope::deserialize(d)?;
        let anchor = DVector::from_vec(w.anchor);
        if anchor.len() != w.carrier.ambient_dim() {
            return Err(serde::de::Error::custom("anchor has the wrong dimension"));
        }
        let reach = w
            .vertices
            .iter()
            .map(|v| (DVector::from_column_slice(v) - &anchor).norm())
            .fold(1.0, f64::max);
        let mut cuts = Vec::with_capacity(w.facets.len());
        for f in &w.facets {
            let n = w.carrier.to_local(&f.normal);
            let len = n.norm();
            if len < 1e-9 {
                return Err(serde::de::Error::custom("facet normal is orthogonal to the carrier"));
            }
            cuts.push((n / len, (f.offset - f.normal.dot(&anchor)) / len, f.label));
        }
        Polytope::from_local_cuts(w.carrier, anchor, cuts, 4.0 * reach).map_err(serde::de::Error::custom)
    }
}
