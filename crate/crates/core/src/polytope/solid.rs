//! Convex polyhedra stored as labelled facet cycles, clipped one halfspace
//! at a time.

use super::Label;

pub(crate) type P3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn inf_norm(a: P3) -> f64 {
    a[0].abs().max(a[1].abs()).max(a[2].abs())
}

/// Coincidence up to a relative tolerance.
#[inline]
fn near(p: P3, q: P3, rel: f64) -> bool {
    inf_norm(sub(p, q)) <= rel * inf_norm(p).max(inf_norm(q))
}

/// A facet: outward unit normal, plane offset and its vertex cycle,
/// counter-clockwise seen from outside.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Face {
    pub normal: P3,
    pub offset: f64,
    pub label: Label,
    pub cycle: Vec<P3>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polyhedron {
    pub faces: Vec<Face>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Clip {
    Unchanged,
    Cut,
    Empty,
}

impl Face {
    pub fn area(&self) -> f64 {
        let n = self.cycle.len();
        let o = self.cycle[0];
        let mut acc = [0.0; 3];
        for i in 1..n - 1 {
            let c = cross(sub(self.cycle[i], o), sub(self.cycle[i + 1], o));
            acc = [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]];
        }
        0.5 * dot(acc, self.normal)
    }
}

impl Polyhedron {
    pub fn cube(bound: f64) -> Self {
        let b = bound;
        let mk = |normal: P3, cycle: Vec<P3>| Face { normal, offset: b, label: Label::Bound, cycle };
        let faces = vec![
            mk([1.0, 0.0, 0.0], vec![[b, -b, -b], [b, b, -b], [b, b, b], [b, -b, b]]),
            mk([-1.0, 0.0, 0.0], vec![[-b, -b, -b], [-b, -b, b], [-b, b, b], [-b, b, -b]]),
            mk([0.0, 1.0, 0.0], vec![[-b, b, -b], [-b, b, b], [b, b, b], [b, b, -b]]),
            mk([0.0, -1.0, 0.0], vec![[-b, -b, -b], [b, -b, -b], [b, -b, b], [-b, -b, b]]),
            mk([0.0, 0.0, 1.0], vec![[-b, -b, b], [b, -b, b], [b, b, b], [-b, b, b]]),
            mk([0.0, 0.0, -1.0], vec![[-b, -b, -b], [-b, b, -b], [b, b, -b], [b, -b, -b]]),
        ];
        Self { faces }
    }

    /// Intersects with `{x : ⟨x, n⟩ ≤ t}` (`n` unit). A vertex `p` within
    /// `slack·(‖p‖∞ + |t|)` of the plane is treated as lying on it.
    pub fn clip(&mut self, n: P3, t: f64, label: Label, slack: f64) -> Clip {
        let side = |p: P3| {
            let d = dot(p, n) - t;
            if d.abs() <= slack * (inf_norm(p) + t.abs()) {
                0.0
            } else {
                d
            }
        };
        let mut any_out = false;
        let mut any_in = false;
        for f in &self.faces {
            for &p in &f.cycle {
                let s = side(p);
                any_out |= s > 0.0;
                any_in |= s < 0.0;
            }
        }
        if !any_out {
            return Clip::Unchanged;
        }
        if !any_in {
            return Clip::Empty;
        }
        let mut cap: Vec<P3> = Vec::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for f in &self.faces {
            let len = f.cycle.len();
            let s: Vec<f64> = f.cycle.iter().map(|&p| side(p)).collect();
            if s.iter().all(|&x| x <= 0.0) {
                for (i, &p) in f.cycle.iter().enumerate() {
                    if s[i] == 0.0 {
                        cap.push(p);
                    }
                }
                faces.push(f.clone());
                continue;
            }
            if s.iter().all(|&x| x >= 0.0) {
                for (i, &p) in f.cycle.iter().enumerate() {
                    if s[i] == 0.0 {
                        cap.push(p);
                    }
                }
                continue;
            }
            let mut out: Vec<P3> = Vec::with_capacity(len + 1);
            for i in 0..len {
                let j = (i + 1) % len;
                let (pi, pj) = (f.cycle[i], f.cycle[j]);
                let (si, sj) = (s[i], s[j]);
                if si <= 0.0 {
                    out.push(pi);
                    if si == 0.0 {
                        cap.push(pi);
                    }
                }
                if (si < 0.0 && sj > 0.0) || (si > 0.0 && sj < 0.0) {
                    let p = edge_point(pi, si, pj, sj);
                    out.push(p);
                    cap.push(p);
                }
            }
            dedupe_cycle(&mut out, 1e-13);
            if out.len() >= 3 {
                let face = Face { cycle: out, ..f.clone() };
                if face.area() > 0.0 {
                    faces.push(face);
                }
            }
        }
        let cap = order_cap(cap, n, 1e-12);
        if cap.len() >= 3 {
            let face = Face { normal: n, offset: t, label, cycle: cap };
            if face.area() > 0.0 {
                faces.push(face);
            }
        }
        if faces.len() < 4 {
            return Clip::Empty;
        }
        self.faces = faces;
        if self.volume() <= 0.0 {
            return Clip::Empty;
        }
        Clip::Cut
    }

    /// Divergence theorem: `V = (1/3) Σ h_F A_F`, with `h_F` measured from
    /// the first vertex of the polyhedron for accuracy.
    pub fn volume(&self) -> f64 {
        let o = self.faces[0].cycle[0];
        self.faces.iter().map(|f| (dot(f.cycle[0], f.normal) - dot(o, f.normal)) * f.area()).sum::<f64>() / 3.0
    }

    /// Distinct vertices, merging points that agree to relative `rel`.
    pub fn vertices(&self, rel: f64) -> Vec<P3> {
        let mut out: Vec<P3> = Vec::new();
        for f in &self.faces {
            for &p in &f.cycle {
                if !out.iter().any(|q| near(*q, p, rel)) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Adjacent facet pairs `(i, j)`, `i < j`, with the length of their
    /// common edge.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            let n = f.cycle.len();
            for a in 0..n {
                let (p, q) = (f.cycle[a], f.cycle[(a + 1) % n]);
                let other = self.faces.iter().enumerate().skip(i + 1).find(|(_, g)| {
                    let m = g.cycle.len();
                    (0..m).any(|b| near(g.cycle[b], q, 1e-12) && near(g.cycle[(b + 1) % m], p, 1e-12))
                });
                if let Some((j, _)) = other {
                    out.push((i, j, norm(sub(q, p))));
                }
            }
        }
        out
    }

    /// Volume-weighted barycentre via a pyramid decomposition.
    pub fn centroid(&self) -> P3 {
        let verts = self.vertices(1e-12);
        let m = verts.len() as f64;
        let c0 = verts.iter().fold([0.0; 3], |a, p| [a[0] + p[0] / m, a[1] + p[1] / m, a[2] + p[2] / m]);
        let mut vol = 0.0;
        let mut acc = [0.0; 3];
        for f in &self.faces {
            let p0 = f.cycle[0];
            for i in 1..f.cycle.len() - 1 {
                let (p1, p2) = (f.cycle[i], f.cycle[i + 1]);
                let v = dot(sub(p0, c0), cross(sub(p1, c0), sub(p2, c0))) / 6.0;
                vol += v;
                for k in 0..3 {
                    acc[k] += v * (c0[k] + p0[k] + p1[k] + p2[k]) / 4.0;
                }
            }
        }
        [acc[0] / vol, acc[1] / vol, acc[2] / vol]
    }

    /// Applies `x ↦ m·x + shift` for orthogonal `m` (times a positive scale).
    pub fn transformed(&self, m: [[f64; 3]; 3], scale: f64, shift: P3) -> Self {
        let lin = |p: P3| {
            [
                m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
                m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
                m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2],
            ]
        };
        let det = dot(
            [m[0][0], m[1][0], m[2][0]],
            cross([m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]),
        );
        let faces = self
            .faces
            .iter()
            .map(|f| {
                let normal = lin(f.normal);
                let mut cycle: Vec<P3> = f
                    .cycle
                    .iter()
                    .map(|&p| {
                        let q = lin(p);
                        [scale * q[0] + shift[0], scale * q[1] + shift[1], scale * q[2] + shift[2]]
                    })
                    .collect();
                if det < 0.0 {
                    cycle.reverse();
                }
                let offset = dot(cycle[0], normal);
                Face { normal, offset, label: f.label, cycle }
            })
            .collect();
        Self { faces }
    }
}

/// Intersection of segment `pq` with the cutting plane, computed in a
/// canonical vertex order so both facets sharing the edge get the same point.
fn edge_point(p: P3, sp: f64, q: P3, sq: f64) -> P3 {
    let (a, sa, b, sb) = if p < q { (p, sp, q, sq) } else { (q, sq, p, sp) };
    let t = sa / (sa - sb);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

fn dedupe_cycle(c: &mut Vec<P3>, rel: f64) {
    let mut k = 0;
    while k < c.len() && c.len() > 1 {
        let next = (k + 1) % c.len();
        if near(c[next], c[k], rel) {
            c.remove(next);
        } else {
            k += 1;
        }
    }
}

/// Unique cap points ordered counter-clockwise around `n`.
fn order_cap(points: Vec<P3>, n: P3, rel: f64) -> Vec<P3> {
    let mut uniq: Vec<P3> = Vec::new();
    for p in points {
        if !uniq.iter().any(|q| near(*q, p, rel)) {
            uniq.push(p);
        }
    }
    if uniq.len() < 3 {
        return uniq;
    }
    let m = uniq.len() as f64;
    let c = uniq.iter().fold([0.0; 3], |a, p| [a[0] + p[0] / m, a[1] + p[1] / m, a[2] + p[2] / m]);
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let a = cross(n, helper);
    let a = {
        let l = norm(a);
        [a[0] / l, a[1] / l, a[2] / l]
    };
    let b = cross(n, a);
    let mut keyed: Vec<(f64, P3)> = uniq
        .into_iter()
        .map(|p| {
            let d = sub(p, c);
            (dot(d, b).atan2(dot(d, a)), p)
        })
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}
