//! Convex polygons with labelled edges, clipped one halfplane at a time.

use super::Label;

pub(crate) type P2 = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Edge {
    pub normal: P2,
    pub offset: f64,
    pub label: Label,
}

/// Counter-clockwise polygon; edge `i` runs from `verts[i]` to
/// `verts[i + 1]` and carries the outward normal of its supporting line.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polygon {
    pub verts: Vec<P2>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Clip {
    Unchanged,
    Cut,
    Empty,
}

#[inline]
pub(crate) fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Polygon {
    pub fn square(bound: f64) -> Self {
        let b = bound;
        let verts = vec![[-b, -b], [b, -b], [b, b], [-b, b]];
        let normals = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        let edges = normals.iter().map(|&n| Edge { normal: n, offset: b, label: Label::Bound }).collect();
        Self { verts, edges }
    }

    /// Intersects with `{x : ⟨x, n⟩ ≤ t}` (`n` unit). A vertex `v` within
    /// `slack·(‖v‖∞ + |t|)` of the line is treated as lying on it.
    pub fn clip(&mut self, n: P2, t: f64, label: Label, slack: f64) -> Clip {
        let s: Vec<f64> = self
            .verts
            .iter()
            .map(|v| {
                let d = dot(*v, n) - t;
                if d.abs() <= slack * (inf_norm(*v) + t.abs()) {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        if s.iter().all(|&x| x <= 0.0) {
            return Clip::Unchanged;
        }
        if s.iter().all(|&x| x >= 0.0) {
            return Clip::Empty;
        }
        let cut = Edge { normal: n, offset: t, label };
        let len = self.verts.len();
        let mut verts = Vec::with_capacity(len + 1);
        let mut edges = Vec::with_capacity(len + 1);
        for i in 0..len {
            let j = (i + 1) % len;
            let (vi, vj) = (self.verts[i], self.verts[j]);
            let (si, sj) = (s[i], s[j]);
            if si <= 0.0 {
                if sj <= 0.0 {
                    verts.push(vi);
                    edges.push(self.edges[i]);
                } else if si < 0.0 {
                    verts.push(vi);
                    edges.push(self.edges[i]);
                    verts.push(lerp(vi, vj, si / (si - sj)));
                    edges.push(cut);
                } else {
                    verts.push(vi);
                    edges.push(cut);
                }
            } else if sj < 0.0 {
                verts.push(lerp(vi, vj, si / (si - sj)));
                edges.push(self.edges[i]);
            }
        }
        // drop zero-length edges
        let mut k = 0;
        while k < verts.len() && verts.len() > 2 {
            let next = (k + 1) % verts.len();
            let d = [verts[next][0] - verts[k][0], verts[next][1] - verts[k][1]];
            if inf_norm(d) <= 1e-14 * inf_norm(verts[k]).max(inf_norm(verts[next])) {
                verts.remove(next);
                edges.remove(k);
            } else {
                k += 1;
            }
        }
        if verts.len() < 3 {
            return Clip::Empty;
        }
        self.verts = verts;
        self.edges = edges;
        if self.area() <= 0.0 {
            return Clip::Empty;
        }
        Clip::Cut
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let a = self.verts[i];
        let b = self.verts[(i + 1) % self.verts.len()];
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Shoelace formula.
    pub fn area(&self) -> f64 {
        let n = self.verts.len();
        0.5 * (0..n).map(|i| cross(self.verts[i], self.verts[(i + 1) % n])).sum::<f64>()
    }

    pub fn centroid(&self) -> P2 {
        let n = self.verts.len();
        // shift to the first vertex for accuracy
        let o = self.verts[0];
        let mut a = 0.0;
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let p = [self.verts[i][0] - o[0], self.verts[i][1] - o[1]];
            let q = [self.verts[(i + 1) % n][0] - o[0], self.verts[(i + 1) % n][1] - o[1]];
            let w = cross(p, q);
            a += w;
            c[0] += (p[0] + q[0]) * w;
            c[1] += (p[1] + q[1]) * w;
        }
        [o[0] + c[0] / (3.0 * a), o[1] + c[1] / (3.0 * a)]
    }

    /// Vertex list with coordinates transformed by `m` (row-major 2×2) and
    /// shifted by `shift`. Orientation is restored if `m` reverses it.
    pub fn transformed(&self, m: [[f64; 2]; 2], shift: P2) -> Self {
        let ap = |p: P2| [m[0][0] * p[0] + m[0][1] * p[1] + shift[0], m[1][0] * p[0] + m[1][1] * p[1] + shift[1]];
        let lin = |p: P2| [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mut verts: Vec<P2> = self.verts.iter().map(|&v| ap(v)).collect();
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(&self.verts)
            .map(|(e, &v)| {
                // normals transform by the inverse transpose; for similarities this is m / det-scale
                let dir = lin([-e.normal[1], e.normal[0]]);
                let nrm = [dir[1], -dir[0]];
                let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1]).sqrt();
                let mut nrm = [nrm[0] / len, nrm[1] / len];
                if det < 0.0 {
                    nrm = [-nrm[0], -nrm[1]];
                }
                Edge { normal: nrm, offset: dot(ap(v), nrm), label: e.label }
            })
            .collect();
        if det < 0.0 {
            // reverse orientation: edge i (v_i -> v_{i+1}) becomes edge from v'_{i+1} -> v'_i
            verts.reverse();
            let n = edges.len();
            let mut e2 = Vec::with_capacity(n);
            for i in 0..n {
                // after reversal, vertex index i corresponds to old n-1-i; its outgoing edge is old edge n-2-i
                e2.push(edges[(2 * n - 2 - i) % n]);
            }
            edges = e2;
        }
        Self { verts, edges }
    }
}

#[inline]
fn inf_norm(a: P2) -> f64 {
    a[0].abs().max(a[1].abs())
}

fn lerp(a: P2, b: P2, t: f64) -> P2 {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_to_triangle_corner() {
        let mut p = Polygon::square(1.0);
        let n = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        assert_eq!(p.clip(n, 0.0, Label::Constraint(0), 1e-10), Clip::Cut);
        assert!((p.area() - 2.0).abs() < 1e-14);
        assert_eq!(p.verts.len(), 3);
        assert!(p.edges.iter().any(|e| e.label == Label::Constraint(0)));
    }

    #[test]
    fn clip_through_vertices_keeps_polygon_simple() {
        let mut p = Polygon::square(1.0);
        let n = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
        assert_eq!(p.clip(n, 0.0, Label::Constraint(1), 1e-10), Clip::Cut);
        assert_eq!(p.verts.len(), 3);
        assert!((p.area() - 2.0).abs() < 1e-14);
        for i in 0..3 {
            let e = p.edges[i];
            assert!((dot(p.verts[i], e.normal) - e.offset).abs() < 1e-14);
            assert!((dot(p.verts[(i + 1) % 3], e.normal) - e.offset).abs() < 1e-14);
        }
    }

    #[test]
    fn redundant_and_infeasible_cuts() {
        let mut p = Polygon::square(1.0);
        assert_eq!(p.clip([1.0, 0.0], 2.0, Label::Constraint(0), 1e-10), Clip::Unchanged);
        assert_eq!(p.clip([1.0, 0.0], -2.0, Label::Constraint(0), 1e-10), Clip::Empty);
    }

    #[test]
    fn reflection_preserves_orientation_and_edges() {
        let mut p = Polygon::square(1.0);
        p.clip([0.6, 0.8], 0.5, Label::Constraint(3), 1e-10);
        let q = p.transformed([[-1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]);
        assert!((q.area() - p.area()).abs() < 1e-14);
        for i in 0..q.verts.len() {
            let e = q.edges[i];
            assert!((dot(q.verts[i], e.normal) - e.offset).abs() < 1e-14);
            assert!((dot(q.verts[(i + 1) % q.verts.len()], e.normal) - e.offset).abs() < 1e-14);
        }
        assert!(q.edges.iter().any(|e| e.label == Label::Constraint(3) && (e.normal[0] + 0.6).abs() < 1e-15));
    }
}
