//! Finite atomic measures on the unit sphere `S^{d−1}`.
//!
//! Directional distributions of hyperplane processes, their spherical
//! projections onto subspaces and surface area measures of polytopes are all
//! represented as [`SphericalMeasure`]s: finite lists of (unit direction,
//! positive mass) atoms. Directions closer than [`MERGE_TOL`] are merged.

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grassmann::{Rotation, Subspace};
use crate::{Error, Result};

/// Chordal distance below which two atom directions are merged.
pub const MERGE_TOL: f64 = 1e-10;

/// Support sizes up to this are checked by enumerating all subsets in the
/// Prokhorov feasibility test; larger supports use a max-flow bound.
pub const PROKHOROV_SUBSET_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub dir: DVector<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl SphericalMeasure {
    /// Builds a measure from raw `(direction, mass)` pairs: directions are
    /// normalised and coincident directions merged.
    pub fn new(dim: usize, atoms: impl IntoIterator<Item = (DVector<f64>, f64)>) -> Result<Self> {
        let mut out = Self { dim, atoms: Vec::new() };
        for (dir, mass) in atoms {
            if dir.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: dir.len() });
            }
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::InvalidMass(mass));
            }
            let n = dir.norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::ZeroDirection);
            }
            out.push_merged(dir / n, mass);
        }
        if out.atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        Ok(out)
    }

    /// The symmetrisation `(μ + μ∘(−id)) / 2` of the given atoms.
    pub fn make_even(atoms: &[(DVector<f64>, f64)]) -> Result<Self> {
        let dim = atoms.first().ok_or(Error::EmptyMeasure)?.0.len();
        let mut sym = Vec::with_capacity(2 * atoms.len());
        for (u, m) in atoms {
            if u.norm() == 0.0 {
                return Err(Error::ZeroDirection);
            }
            sym.push((u.clone(), m / 2.0));
            sym.push((-u, m / 2.0));
        }
        Self::new(dim, sym)
    }

    /// `±e_i` with mass `1/(2d)` each.
    pub fn cross(dim: usize) -> Self {
        let atoms = (0..dim).flat_map(|i| {
            let e = crate::grassmann::unit(dim, i);
            [(e.clone(), 0.5 / dim as f64), (-e, 0.5 / dim as f64)]
        });
        Self::new(dim, atoms).expect("cross measure is valid")
    }

    fn push_merged(&mut self, dir: DVector<f64>, mass: f64) {
        if let Some(a) = self.atoms.iter_mut().find(|a| (&a.dir - &dir).norm() < MERGE_TOL) {
            a.mass += mass;
        } else {
            self.atoms.push(Atom { dir, mass });
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Whether every atom `(u, m)` has a partner `(−u, m)`.
    pub fn is_even(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| {
            self.atoms
                .iter()
                .any(|b| (&a.dir + &b.dir).norm() < MERGE_TOL && (a.mass - b.mass).abs() <= tol)
        })
    }

    /// Dimension of the linear span of the support.
    pub fn support_rank(&self) -> usize {
        let m = nalgebra::DMatrix::from_columns(
            &self.atoms.iter().map(|a| a.dir.clone()).collect::<Vec<_>>(),
        );
        m.svd(false, false).singular_values.iter().filter(|&&s| s > 1e-9).count()
    }

    pub fn spans(&self) -> bool {
        self.support_rank() == self.dim
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { dir: a.dir.clone(), mass: a.mass * factor }).collect(),
        }
    }

    /// Rescaled to total mass one.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.total_mass())
    }

    /// Image measure `ρμ`.
    pub fn rotated(&self, rho: &Rotation) -> Self {
        Self {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { dir: rho.apply(&a.dir), mass: a.mass }).collect(),
        }
    }

    /// `∫ |⟨u, v⟩| μ(dv)`, twice the support function of the zonoid generated
    /// by `μ/2`.
    pub fn cosine_transform(&self, u: &DVector<f64>) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.dir.dot(u).abs()).sum()
    }

    /// `Σ m_i u_i`; zero for the surface area measure of a closed polytope.
    pub fn first_moment(&self) -> DVector<f64> {
        self.atoms.iter().fold(DVector::zeros(self.dim), |acc, a| acc + a.mass * &a.dir)
    }

    /// The nondegeneracy number `m(μ) = min_{‖u‖=1} ∫ |⟨u, v⟩| μ(dv)`.
    ///
    /// The integrand is the support function of a zonotope `Z` containing
    /// the origin, so its minimum over the sphere is the distance from `o` to
    /// the boundary of `Z`, attained at a facet normal. Facet normals of a
    /// zonotope are normals of hyperplanes spanned by `d − 1` generators,
    /// which are enumerated exactly.
    pub fn nondegeneracy(&self) -> Result<f64> {
        let rank = self.support_rank();
        if rank < self.dim {
            return Err(Error::DegenerateSupport { rank, dim: self.dim });
        }
        let axes = self.axes();
        let d = self.dim;
        let mut best = f64::INFINITY;
        let mut idx: Vec<usize> = (0..d - 1).collect();
        if d == 1 {
            return Ok(self.total_mass());
        }
        loop {
            let vs: Vec<&DVector<f64>> = idx.iter().map(|&i| &axes[i]).collect();
            if let Some(n) = common_normal(&vs, d) {
                best = best.min(self.cosine_transform(&n));
            }
            if !next_combination(&mut idx, axes.len()) {
                break;
            }
        }
        Ok(best)
    }

    /// One representative direction per antipodal pair of the support.
    fn axes(&self) -> Vec<DVector<f64>> {
        let mut axes: Vec<DVector<f64>> = Vec::new();
        for a in &self.atoms {
            if !axes.iter().any(|b| (b - &a.dir).norm() < 1e-9 || (b + &a.dir).norm() < 1e-9) {
                axes.push(a.dir.clone());
            }
        }
        axes
    }

    /// Spherical projection `π_L μ`: each atom `(u, m)` with `u ∉ L^⊥` is sent
    /// to `(u|L / ‖u|L‖, m‖u|L‖)`. Directions stay in ambient coordinates.
    pub fn project(&self, l: &Subspace) -> Result<Self> {
        if l.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: l.ambient_dim() });
        }
        let mut out = Self { dim: self.dim, atoms: Vec::new() };
        for a in &self.atoms {
            let p = l.project(&a.dir);
            let n = p.norm();
            if n > 1e-12 {
                out.push_merged(p / n, a.mass * n);
            }
        }
        Ok(out)
    }

    /// Re-expresses a measure concentrated on `L` in the frame coordinates of
    /// `L`, giving a measure on `S^{k−1}`.
    pub fn to_local(&self, l: &Subspace) -> Result<Self> {
        let mut out = Self { dim: l.dim(), atoms: Vec::new() };
        for a in &self.atoms {
            if !l.contains(&a.dir, 1e-9) {
                return Err(Error::InvalidParameter("atom direction does not lie in the subspace".into()));
            }
            let y = l.to_local(&a.dir);
            let n = y.norm();
            out.push_merged(y / n, a.mass);
        }
        Ok(out)
    }

    /// Inverse of [`to_local`](Self::to_local).
    pub fn from_local(&self, l: &Subspace) -> Self {
        Self {
            dim: l.ambient_dim(),
            atoms: self.atoms.iter().map(|a| Atom { dir: l.from_local(&a.dir), mass: a.mass }).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WireAtom {
    dir: Vec<f64>,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct WireMeasure {
    dim: usize,
    atoms: Vec<WireAtom>,
}

impl Serialize for SphericalMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| WireAtom { dir: a.dir.iter().copied().collect(), mass: a.mass })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SphericalMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WireMeasure::deserialize(d)?;
        SphericalMeasure::new(w.dim, w.atoms.into_iter().map(|a| (DVector::from_vec(a.dir), a.mass)))
            .map_err(serde::de::Error::custom)
    }
}

/// Unit normal of the hyperplane spanned by `d − 1` vectors, if they are
/// independent.
fn common_normal(vs: &[&DVector<f64>], d: usize) -> Option<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    for v in vs {
        let mut w = (*v).clone();
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&w);
                w.axpy(-p, b, 1.0);
            }
        }
        let n = w.norm();
        if n < 1e-10 {
            return None;
        }
        basis.push(w / n);
    }
    let mut best: Option<DVector<f64>> = None;
    for i in 0..d {
        let mut w = crate::grassmann::unit(d, i);
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&w);
                w.axpy(-p, b, 1.0);
            }
        }
        if best.as_ref().map_or(true, |b| w.norm() > b.norm()) {
            best = Some(w);
        }
    }
    best.map(|w| {
        let n = w.norm();
        w / n
    })
}

/// Advances `idx` to the next `idx.len()`-subset of `0..n` in lexicographic
/// order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 || k > n {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Prokhorov distance between finite atomic measures, to within `tol`.
///
/// `ε` is feasible iff `μ(A) ≤ ν(A_ε) + ε` and `ν(A) ≤ μ(A_ε) + ε` for all
/// Borel `A`, where `A_ε` is the open chordal `ε`-neighbourhood. For atomic
/// measures it suffices to let `A` range over subsets of the support. The
/// largest violation `max_A μ(A) − ν(A_ε)` is found by subset enumeration
/// for small supports and otherwise as `μ(S) − maxflow` in the bipartite
/// network joining atoms closer than `ε`. The infimum of feasible `ε` is
/// located by bisection.
pub fn prokhorov(mu: &SphericalMeasure, nu: &SphericalMeasure, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch { expected: mu.dim, found: nu.dim });
    }
    let dist: Vec<Vec<f64>> = mu
        .atoms
        .iter()
        .map(|a| nu.atoms.iter().map(|b| (&a.dir - &b.dir).norm()).collect())
        .collect();
    let dist_t: Vec<Vec<f64>> =
        (0..nu.len()).map(|j| (0..mu.len()).map(|i| dist[i][j]).collect()).collect();
    let mu_m: Vec<f64> = mu.atoms.iter().map(|a| a.mass).collect();
    let nu_m: Vec<f64> = nu.atoms.iter().map(|a| a.mass).collect();
    let feasible = |eps: f64| {
        max_deficiency(&mu_m, &nu_m, &dist, eps) <= eps && max_deficiency(&nu_m, &mu_m, &dist_t, eps) <= eps
    };
    let mut lo = 0.0;
    let mut hi = mu.total_mass().max(nu.total_mass()) + tol;
    // a nearest-atom bijection within δ and total mass defect m shows that
    // any ε > max(δ, m) is feasible
    if let Some(bound) = matching_bound(&dist, &mu_m, &nu_m) {
        if bound < tol {
            return Ok(bound);
        }
        hi = hi.min(bound);
    }
    if feasible(tol * 1e-3) {
        return Ok(tol * 1e-3);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn matching_bound(dist: &[Vec<f64>], a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let (mut reach, mut defect) = (0.0f64, 0.0);
    for (i, row) in dist.iter().enumerate() {
        let j = (0..row.len()).min_by(|&x, &y| row[x].total_cmp(&row[y]))?;
        if used[j] {
            return None;
        }
        used[j] = true;
        reach = reach.max(row[j]);
        defect += (a[i] - b[j]).abs();
    }
    Some((reach * (1.0 + 1e-12) + f64::MIN_POSITIVE).max(defect * (1.0 + 1e-12)))
}

/// `max_A a(A) − b(A_ε)` over subsets `A` of the support of `a`.
pub(crate) fn max_deficiency(a: &[f64], b: &[f64], dist: &[Vec<f64>], eps: f64) -> f64 {
    if a.len() <= PROKHOROV_SUBSET_LIMIT {
        deficiency_by_subsets(a, b, dist, eps)
    } else {
        deficiency_by_flow(a, b, dist, eps)
    }
}

pub(crate) fn deficiency_by_subsets(a: &[f64], b: &[f64], dist: &[Vec<f64>], eps: f64) -> f64 {
    let n = a.len();
    let nbr: Vec<u64> = (0..n)
        .map(|i| {
            dist[i].iter().enumerate().filter(|(_, &d)| d < eps).fold(0u64, |m, (j, _)| m | (1 << j))
        })
        .collect();
    let mut best = 0.0f64;
    if b.len() > 64 {
        return deficiency_by_flow(a, b, dist, eps);
    }
    for mask in 1u64..(1u64 << n) {
        let mut ma = 0.0;
        let mut cover = 0u64;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                ma += a[i];
                cover |= nbr[i];
            }
        }
        let mb: f64 = (0..b.len()).filter(|j| cover & (1 << j) != 0).map(|j| b[j]).sum();
        best = best.max(ma - mb);
    }
    best
}

/// `a(S) − maxflow` in the network `source → i (a_i) → j (∞ if d_ij < ε) →
/// sink (b_j)`; by max-flow/min-cut this equals `max_A a(A) − b(A_ε)`.
pub(crate) fn deficiency_by_flow(a: &[f64], b: &[f64], dist: &[Vec<f64>], eps: f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    let total: f64 = a.iter().sum();
    let mut from_src = a.to_vec();
    let mut to_sink = b.to_vec();
    // residual capacities on the middle edges are infinite forward; track flow for back edges
    let mut flow = vec![vec![0.0f64; m]; n];
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..m).filter(|&j| dist[i][j] < eps).collect()).collect();
    let adj_t: Vec<Vec<usize>> = (0..m).map(|j| (0..n).filter(|&i| dist[i][j] < eps).collect()).collect();
    let mut pushed = 0.0;
    let cap_eps = 1e-15 * total.max(1e-300);
    loop {
        // BFS over left nodes (reached from source) and right nodes.
        let mut prev_left: Vec<Option<usize>> = vec![None; n]; // right node we came from (None = source)
        let mut seen_left = vec![false; n];
        let mut prev_right: Vec<usize> = vec![usize::MAX; m];
        let mut queue = std::collections::VecDeque::new();
        for i in 0..n {
            if from_src[i] > cap_eps {
                seen_left[i] = true;
                queue.push_back(i);
            }
        }
        let mut sink_via: Option<usize> = None;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if prev_right[j] != usize::MAX {
                    continue;
                }
                prev_right[j] = i;
                if to_sink[j] > cap_eps {
                    sink_via = Some(j);
                    break;
                }
                for &i2 in &adj_t[j] {
                    if !seen_left[i2] && flow[i2][j] > cap_eps {
                        seen_left[i2] = true;
                        prev_left[i2] = Some(j);
                        queue.push_back(i2);
                    }
                }
            }
            if sink_via.is_some() {
                break;
            }
        }
        let Some(j_end) = sink_via else { break };
        // bottleneck
        let mut bottleneck = to_sink[j_end];
        let mut j = j_end;
        loop {
            let i = prev_right[j];
            match prev_left[i] {
                None => {
                    bottleneck = bottleneck.min(from_src[i]);
                    break;
                }
                Some(jb) => {
                    bottleneck = bottleneck.min(flow[i][jb]);
                    j = jb;
                }
            }
        }
        // augment
        to_sink[j_end] -= bottleneck;
        let mut j = j_end;
        loop {
            let i = prev_right[j];
            flow[i][j] += bottleneck;
            match prev_left[i] {
                None => {
                    from_src[i] -= bottleneck;
                    break;
                }
                Some(jb) => {
                    flow[i][jb] -= bottleneck;
                    j = jb;
                }
            }
        }
        pushed += bottleneck;
    }
    (total - pushed).max(0.0)
}
