//! Linear subspaces, proper rotations and the Grassmannian metric `Δ`.
//!
//! `Δ(L, E)` is the smallest Frobenius defect `‖M_ρ − I‖` of a rotation
//! carrying `L` onto `E`. It is evaluated in closed form from the principal
//! angles between the two subspaces: the *direct rotation* turns each
//! principal vector of `L` onto its partner in `E` inside the plane they
//! span, and a plane rotation by `θ` contributes `8 sin²(θ/2)` to the squared
//! defect.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Subspaces closer than this in `Δ` are treated as equal.
pub const SUBSPACE_EQ_TOL: f64 = 1e-9;

/// Principal angles whose cosine is below this are treated as right angles.
const RIGHT_ANGLE_COS: f64 = 1e-9;

/// A linear subspace of `R^d`, stored as a `d × k` matrix with orthonormal
/// columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a frame whose columns are already orthonormal.
    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self> {
        let k = frame.ncols();
        if k == 0 || k > frame.nrows() {
            return Err(Error::InvalidParameter(format!(
                "frame must be d x k with 1 <= k <= d, got {} x {k}",
                frame.nrows()
            )));
        }
        let gram = frame.transpose() * &frame;
        let err = (gram - DMatrix::<f64>::identity(k, k)).abs().max();
        if err > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "frame columns are not orthonormal (error {err:e})"
            )));
        }
        Ok(Self { frame })
    }

    /// Orthonormalises the given spanning vectors (in order).
    pub fn span(vectors: &[DVector<f64>]) -> Result<Self> {
        let d = vectors.first().ok_or(Error::EmptyMeasure)?.len();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
            let scale = v.norm();
            if scale == 0.0 {
                return Err(Error::ZeroDirection);
            }
            let mut w = v / scale;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&w);
                    w.axpy(-proj, c, 1.0);
                }
            }
            let n = w.norm();
            if n < 1e-10 {
                return Err(Error::DegenerateSupport { rank: cols.len(), dim: vectors.len() });
            }
            cols.push(w / n);
        }
        Ok(Self { frame: DMatrix::from_columns(&cols) })
    }

    /// The whole space `R^d` with the standard frame.
    pub fn whole(d: usize) -> Self {
        Self { frame: DMatrix::identity(d, d) }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(d: usize, axes: &[usize]) -> Result<Self> {
        let cols: Vec<DVector<f64>> = axes
            .iter()
            .map(|&i| {
                if i >= d {
                    Err(Error::InvalidParameter(format!("axis {i} out of range for R^{d}")))
                } else {
                    Ok(unit(d, i))
                }
            })
            .collect::<Result<_>>()?;
        Self::span(&cols)
    }

    /// The hyperplane `u^⊥` with a canonical frame: the `d − 1` standard basis
    /// vectors least aligned with `u`, orthonormalised against `u` in index
    /// order. For `u = ±e_i` this is exactly the remaining coordinate axes.
    pub fn hyperplane(u: &DVector<f64>) -> Result<Self> {
        let d = u.len();
        let n = u.norm();
        if n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let u = u / n;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()).then(a.cmp(&b)));
        let mut chosen: Vec<usize> = order[..d - 1].to_vec();
        chosen.sort_unstable();
        let mut cols = Vec::with_capacity(d - 1);
        for i in chosen {
            let mut w = unit(d, i);
            for _ in 0..2 {
                let p = u.dot(&w);
                w.axpy(-p, &u, 1.0);
                for c in &cols {
                    let p: f64 = DVector::dot(c, &w);
                    w.axpy(-p, c, 1.0);
                }
            }
            let len = w.norm();
            cols.push(w / len);
        }
        Ok(Self { frame: DMatrix::from_columns(&cols) })
    }

    /// Orthogonal complement `L^⊥`.
    pub fn complement(&self) -> Option<Self> {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == d {
            return None;
        }
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(d - k);
        let mut cands: Vec<(f64, DVector<f64>)> = (0..d)
            .map(|i| {
                let e = unit(d, i);
                let r = &e - self.project(&e);
                (r.norm(), r)
            })
            .collect();
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (_, mut w) in cands {
            for _ in 0..2 {
                let p = self.project(&w);
                w -= p;
                for c in &cols {
                    let p: f64 = DVector::dot(c, &w);
                    w.axpy(-p, c, 1.0);
                }
            }
            let n = w.norm();
            if n > 1e-8 {
                cols.push(w / n);
            }
            if cols.len() == d - k {
                break;
            }
        }
        Some(Self { frame: DMatrix::from_columns(&cols) })
    }

    /// Haar-random `k`-dimensional subspace of `R^d`.
    pub fn random<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Self {
        loop {
            let vs: Vec<DVector<f64>> = (0..k).map(|_| gaussian_vector(d, rng)).collect();
            if let Ok(s) = Self::span(&vs) {
                return s;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthogonal projection `x|L`, in ambient coordinates.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.frame * (self.frame.transpose() * x)
    }

    /// Coordinates of `x|L` with respect to the frame.
    pub fn to_local(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * x
    }

    pub fn from_local(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.frame * y
    }

    /// Whether `x` lies in `L` up to `tol` (absolute).
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        (x - self.project(x)).norm() <= tol
    }

    /// `ρL`, carrying the frame along so local coordinates are preserved.
    pub fn rotated(&self, rho: &Rotation) -> Self {
        Self { frame: &rho.matrix * &self.frame }
    }

    /// Equality up to [`SUBSPACE_EQ_TOL`] in the metric `Δ`.
    pub fn approx_eq(&self, other: &Subspace) -> bool {
        matches!(delta(self, other), Ok(v) if v < SUBSPACE_EQ_TOL)
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cols: Vec<Vec<f64>> =
            self.frame.column_iter().map(|c| c.iter().copied().collect()).collect();
        cols.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cols: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let vs: Vec<DVector<f64>> = cols.into_iter().map(DVector::from_vec).collect();
        Subspace::span(&vs).map_err(serde::de::Error::custom)
    }
}

/// A proper rotation of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.ncols() });
        }
        let err = (matrix.transpose() * &matrix - DMatrix::<f64>::identity(d, d)).abs().max();
        if err > 1e-9 {
            return Err(Error::InvalidParameter(format!("matrix is not orthogonal (error {err:e})")));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("determinant is {det}, expected +1")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: DMatrix::identity(d, d) }
    }

    /// Rotation of `R^3` by `angle` about `axis` (right-hand rule).
    pub fn axis_angle(axis: &DVector<f64>, angle: f64) -> Result<Self> {
        if axis.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: axis.len() });
        }
        let n = axis.norm();
        if n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let a = nalgebra::Vector3::new(axis[0], axis[1], axis[2]) / n;
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(a), angle);
        Ok(Self { matrix: DMatrix::from_iterator(3, 3, r.matrix().iter().copied()) })
    }

    /// Rotation by `angle` in the coordinate plane `(e_i, e_j)`, turning `e_i`
    /// towards `e_j`.
    pub fn plane(d: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(d, d);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(j, i)] = s;
        m[(i, j)] = -s;
        Self { matrix: m }
    }

    /// Haar-random rotation, via QR of a Gaussian matrix with sign fix.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Self { matrix: q }
    }

    /// Rotation by `angle` in the plane spanned by orthonormal `a`, `b`,
    /// turning `a` towards `b`.
    pub fn in_plane(a: &DVector<f64>, b: &DVector<f64>, angle: f64) -> Self {
        let d = a.len();
        let (s, c) = angle.sin_cos();
        let mut m = DMatrix::identity(d, d);
        m += (c - 1.0) * (a * a.transpose() + b * b.transpose());
        m += s * (b * a.transpose() - a * b.transpose());
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `|ρ| = ‖M_ρ − I‖` (Frobenius).
    pub fn defect(&self) -> f64 {
        let d = self.dim();
        (&self.matrix - DMatrix::<f64>::identity(d, d)).norm()
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("rotation matrix must be square"));
        }
        Rotation::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j])).map_err(serde::de::Error::custom)
    }
}

/// Principal vectors between two equal-dimensional subspaces.
///
/// `from[i]` and `to[i]` are unit vectors of `L` and `E` with
/// `⟨from[i], to[j]⟩ = cos[i]·δ_ij`; `sin[i]` is computed from the residual
/// `to[i] − cos[i]·from[i]` so that small angles keep full relative accuracy.
#[derive(Clone, Debug)]
pub struct PrincipalPairs {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub from: Vec<DVector<f64>>,
    pub to: Vec<DVector<f64>>,
}

impl PrincipalPairs {
    pub fn compute(l: &Subspace, e: &Subspace) -> Result<Self> {
        check_same_shape(l, e)?;
        let c = l.frame.transpose() * &e.frame;
        let (u, sv, v) = jacobi_svd(c);
        let k = l.dim();
        let mut cos = Vec::with_capacity(k);
        let mut sin = Vec::with_capacity(k);
        let mut from = Vec::with_capacity(k);
        let mut to = Vec::with_capacity(k);
        for i in 0..k {
            let sigma = sv[i].clamp(0.0, 1.0);
            let p = &l.frame * u.column(i);
            let q = &e.frame * v.column(i);
            let r = &q - sigma * &p;
            cos.push(sigma);
            sin.push(r.norm().min(1.0));
            from.push(p);
            to.push(q);
        }
        Ok(Self { cos, sin, from, to })
    }

    /// Principal angles in `[0, π/2]`, same order as the pairs.
    pub fn angles(&self) -> Vec<f64> {
        self.sin.iter().zip(&self.cos).map(|(s, c)| s.atan2(*c)).collect()
    }

    /// Squared defect of the direct rotation, `Σ 4 sin²θ / (1 + cos θ)`.
    pub fn defect_squared(&self) -> f64 {
        self.sin.iter().zip(&self.cos).map(|(s, c)| 4.0 * s * s / (1.0 + c)).sum()
    }

    /// Number of principal angles equal to `π/2`; the defect-minimising
    /// rotation is unique iff this is zero.
    pub fn right_angles(&self) -> usize {
        self.cos.iter().filter(|&&c| c < RIGHT_ANGLE_COS).count()
    }

    /// The direct rotation with the partner of each right-angle pair
    /// optionally replaced by another unit vector of `E ∩ L^⊥`.
    fn rotation_with_targets(&self, targets: &[DVector<f64>]) -> Rotation {
        let d = self.from[0].len();
        let mut m = DMatrix::<f64>::identity(d, d);
        for i in 0..self.cos.len() {
            let (c, s) = (self.cos[i], self.sin[i]);
            if s < 1e-15 {
                continue;
            }
            let p = &self.from[i];
            let w = (&targets[i] - c * p) / s;
            m += (c - 1.0) * (p * p.transpose() + &w * w.transpose());
            m += s * (&w * p.transpose() - p * w.transpose());
        }
        Rotation { matrix: m }
    }
}

/// SVD `C = U diag(σ) Vᵀ` of a small square matrix by one-sided Jacobi
/// rotations, with `σ` in decreasing order.
///
/// nalgebra's bidiagonal SVD returns inaccurate factors for a few percent of
/// cross-Gram matrices with clustered singular values near 1, which is the
/// common case for nearby subspaces.
fn jacobi_svd(c: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = c.ncols();
    let mut a = c;
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut a, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = cs * x - sn * y;
                        m[(r, j)] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut vs = DMatrix::<f64>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (col, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        vs.set_column(col, &v.column(j));
        if norms[j] > 0.0 {
            u.set_column(col, &(a.column(j) / norms[j]));
        } else {
            // complete an orthonormal basis for a null column
            for b in 0..n {
                let mut x = DVector::<f64>::zeros(n);
                x[b] = 1.0;
                for prev in 0..col {
                    let proj = u.column(prev).dot(&x);
                    x -= proj * u.column(prev);
                }
                let nx = x.norm();
                if nx > 0.5 {
                    u.set_column(col, &(x / nx));
                    break;
                }
            }
        }
    }
    (u, sigma, vs)
}

fn check_same_shape(l: &Subspace, e: &Subspace) -> Result<()> {
    if l.ambient_dim() != e.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: l.ambient_dim(), found: e.ambient_dim() });
    }
    if l.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: e.dim() });
    }
    Ok(())
}

/// Principal angles between `L` and `E`, in decreasing order.
pub fn principal_angles(l: &Subspace, e: &Subspace) -> Result<Vec<f64>> {
    let mut a = PrincipalPairs::compute(l, e)?.angles();
    a.sort_by(|x, y| y.total_cmp(x));
    Ok(a)
}

/// `Δ(L, E) = min{|ρ| : ρL = E}`.
pub fn delta(l: &Subspace, e: &Subspace) -> Result<f64> {
    Ok(PrincipalPairs::compute(l, e)?.defect_squared().sqrt())
}

/// The direct rotation carrying `L` onto `E`; its defect equals `Δ(L, E)`.
pub fn minimal_rotation(l: &Subspace, e: &Subspace) -> Result<Rotation> {
    let pairs = PrincipalPairs::compute(l, e)?;
    Ok(pairs.rotation_with_targets(&pairs.to))
}

/// Defect-minimal rotations carrying `L` onto `E`.
///
/// The first entry is the canonical direct rotation. When some principal
/// angles equal `π/2` the minimiser is not unique: any orthogonal matching of
/// `L ∩ E^⊥` onto `E ∩ L^⊥` gives the same defect. The family is then
/// sampled by sign flips of the right-angle partners and, for two or more
/// such pairs, by a few pairwise mixes.
pub fn minimal_rotations(l: &Subspace, e: &Subspace) -> Result<Vec<Rotation>> {
    let pairs = PrincipalPairs::compute(l, e)?;
    let mut out = vec![pairs.rotation_with_targets(&pairs.to)];
    let right: Vec<usize> =
        (0..pairs.cos.len()).filter(|&i| pairs.cos[i] < RIGHT_ANGLE_COS).collect();
    if right.is_empty() {
        return Ok(out);
    }
    let m = right.len().min(4);
    for mask in 1u32..(1 << m) {
        let mut targets = pairs.to.clone();
        for (b, &i) in right.iter().take(m).enumerate() {
            if mask & (1 << b) != 0 {
                targets[i] = -&targets[i];
            }
        }
        out.push(pairs.rotation_with_targets(&targets));
    }
    for a in 0..right.len() {
        for b in (a + 1)..right.len() {
            for &phi in &[std::f64::consts::FRAC_PI_4, 3.0 * std::f64::consts::FRAC_PI_4] {
                let (s, c) = f64::sin_cos(phi);
                let (qa, qb) = (&pairs.to[right[a]], &pairs.to[right[b]]);
                let mut targets = pairs.to.clone();
                targets[right[a]] = c * qa + s * qb;
                targets[right[b]] = -s * qa + c * qb;
                out.push(pairs.rotation_with_targets(&targets));
            }
        }
    }
    Ok(out)
}

/// Membership in the open neighbourhood `N_θ(L*) = {L : Δ(L, L*) < θ}`.
pub fn in_neighborhood(l: &Subspace, l_star: &Subspace, theta: f64) -> Result<bool> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    Ok(delta(l, l_star)? < theta)
}

/// The `i`-th standard basis vector of `R^d`.
pub fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

/// A standard Gaussian vector in `R^d`.
pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    /// Plane in R^3 containing e1 whose normal is tilted by `w` from e3.
    fn tilted_plane(w: f64) -> Subspace {
        Subspace::hyperplane(&v(&[0.0, -w.sin(), w.cos()])).unwrap()
    }

    #[test]
    fn identity_has_zero_defect() {
        assert_eq!(Rotation::identity(4).defect(), 0.0);
    }

    #[test]
    fn axis_angle_defect_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &w in &[0.1, 0.7, 1.5, 2.9, PI] {
            let axis = gaussian_vector(3, &mut rng);
            let r = Rotation::axis_angle(&axis, w).unwrap();
            let expected = 2.0 * 2f64.sqrt() * (w / 2.0).sin().abs();
            assert!((r.defect() - expected).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn defect_of_inverse_is_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..6 {
            let r = Rotation::random(d, &mut rng);
            assert!((r.defect() - r.inverse().defect()).abs() < 1e-12);
            assert!((r.matrix().determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn displacement_bounded_by_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.random_range(2..6);
            let r = Rotation::random(d, &mut rng);
            let x = gaussian_vector(d, &mut rng);
            assert!((&x - r.apply(&x)).norm() <= r.defect() * x.norm() + 1e-12);
        }
    }

    #[test]
    fn delta_of_equal_subspaces_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = Subspace::random(4, 2, &mut rng);
        assert!(delta(&l, &l).unwrap() < 1e-12);
        assert!(l.approx_eq(&l));
    }

    #[test]
    fn delta_of_dihedral_planes() {
        for &w in &[1e-6, 0.05, 0.4, 1.0, PI / 2.0] {
            let l = tilted_plane(0.0);
            let e = tilted_plane(w);
            let expected = 2.0 * 2f64.sqrt() * (w / 2.0).sin();
            let got = delta(&l, &e).unwrap();
            assert!((got - expected).abs() < 1e-12, "w={w}: {got} vs {expected}");
        }
    }

    #[test]
    fn delta_rejects_dimension_mismatch() {
        let a = Subspace::coordinate(3, &[0]).unwrap();
        let b = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(matches!(delta(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn principal_pairs_of_hyperplanes_are_biorthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let d = rng.random_range(4..6);
            let l = Subspace::random(d, d - 1, &mut rng);
            let e = Subspace::random(d, d - 1, &mut rng);
            let pp = PrincipalPairs::compute(&l, &e).unwrap();
            for i in 0..d - 1 {
                for j in 0..d - 1 {
                    let expected = if i == j { pp.cos[i] } else { 0.0 };
                    assert!((pp.from[i].dot(&pp.to[j]) - expected).abs() < 1e-12);
                }
            }
            assert!(delta(&l.rotated(&minimal_rotation(&l, &e).unwrap()), &e).unwrap() < 1e-12);
        }
    }

    #[test]
    fn minimal_rotation_maps_and_attains_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.random_range(3..6);
            let k = rng.random_range(1..d);
            let l = Subspace::random(d, k, &mut rng);
            let e = Subspace::random(d, k, &mut rng);
            let rho = minimal_rotation(&l, &e).unwrap();
            Rotation::from_matrix(rho.matrix().clone()).unwrap();
            let image = l.rotated(&rho);
            for c in image.frame().column_iter() {
                assert!(e.contains(&c.into_owned(), 1e-10));
            }
            assert!((rho.defect() - delta(&l, &e).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn minimal_rotation_about_common_line() {
        let w = 0.6;
        let l = tilted_plane(0.0);
        let e = tilted_plane(w);
        let rho = minimal_rotation(&l, &e).unwrap();
        let expected = Rotation::axis_angle(&v(&[1.0, 0.0, 0.0]), w).unwrap();
        assert!((rho.matrix() - expected.matrix()).abs().max() < 1e-12);
        assert!((rho.apply(&v(&[1.0, 0.0, 0.0])) - v(&[1.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn minimal_rotation_inverse_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let l = Subspace::random(4, 2, &mut rng);
            let e = Subspace::random(4, 2, &mut rng);
            let a = minimal_rotation(&l, &e).unwrap();
            let b = minimal_rotation(&e, &l).unwrap();
            assert!((a.matrix() - b.inverse().matrix()).abs().max() < 1e-9);
        }
    }

    #[test]
    fn equal_subspaces_give_identity() {
        let l = Subspace::coordinate(3, &[0, 2]).unwrap();
        let rho = minimal_rotation(&l, &l).unwrap();
        assert!(rho.defect() < 1e-14);
    }

    #[test]
    fn perpendicular_planes_expose_family() {
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let e = Subspace::coordinate(3, &[0, 2]).unwrap();
        let fam = minimal_rotations(&l, &e).unwrap();
        assert_eq!(fam.len(), 2);
        let dl = delta(&l, &e).unwrap();
        for r in &fam {
            assert!((r.defect() - dl).abs() < 1e-12);
            assert!(l.rotated(r).approx_eq(&e));
        }
        assert!((fam[0].matrix() - fam[1].matrix()).abs().max() > 0.5);
    }

    #[test]
    fn neighbourhood_is_open_and_monotone() {
        let w = 0.3;
        let l = tilted_plane(0.0);
        let e = tilted_plane(w);
        let theta = delta(&l, &e).unwrap();
        assert!(!in_neighborhood(&e, &l, theta).unwrap());
        assert!(in_neighborhood(&e, &l, theta * (1.0 + 1e-9)).unwrap());
        assert!(in_neighborhood(&l, &l, 1e-12).unwrap());
        assert!(in_neighborhood(&l, &l, 0.0).is_err());
    }

    #[test]
    fn hyperplane_frames_are_canonical() {
        let h = Subspace::hyperplane(&v(&[0.0, 0.0, -2.0])).unwrap();
        assert_eq!(h.frame(), &DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        let h = Subspace::hyperplane(&v(&[1.0, 2.0, 3.0])).unwrap();
        assert!((h.frame().transpose() * v(&[1.0, 2.0, 3.0])).norm() < 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = Subspace::random(5, 2, &mut rng);
        let c = l.complement().unwrap();
        assert_eq!(c.dim(), 3);
        assert!((l.frame().transpose() * c.frame()).abs().max() < 1e-12);
    }

    #[test]
    fn subspace_json_is_column_list() {
        let l = Subspace::coordinate(3, &[0, 1]).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, "[[1.0,0.0,0.0],[0.0,1.0,0.0]]");
        let back: Subspace = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }
}
