//! Small dense linear programs on top of `microlp`, with an active-set
//! refinement of the vertex the simplex method returns.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// `min c·x` subject to `lo_j ≤ x_j ≤ hi_j` and `a_i·x ≤ b_i`.
pub(crate) struct LinearProgram {
    pub c: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn solve(&self) -> Result<Vec<f64>> {
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self.c.iter().zip(&self.bounds).map(|(&c, &b)| p.add_var(c, b)).collect();
        for (a, b) in &self.rows {
            let expr: Vec<_> = vars.iter().zip(a).filter(|(_, &x)| x != 0.0).map(|(&v, &x)| (v, x)).collect();
            p.add_constraint(expr, ComparisonOp::Le, *b);
        }
        let sol = p
            .solve()
            .map_err(|e| Error::Lp(e.to_string()))?
            .into_solution()
            .map_err(|_| Error::Lp("interrupted".into()))?;
        let x: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
        Ok(self.polish(x))
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    fn violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|(a, b)| a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b);
        let bounds = self.bounds.iter().zip(x).map(|(&(lo, hi), &x)| (lo - x).max(x - hi));
        rows.chain(bounds).fold(0.0f64, f64::max)
    }

    /// Re-solves the near-active constraints as equalities. The simplex
    /// tolerances leave errors around 1e-9; the vertex they identify is
    /// usually exact, so this recovers near machine precision.
    fn polish(&self, x: Vec<f64>) -> Vec<f64> {
        let n = x.len();
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut act: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, b) in &self.rows {
            let s: f64 = a.iter().zip(&x).map(|(a, x)| a * x).sum();
            let an = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            if (s - b).abs() <= 1e-7 * scale * an {
                act.push((a.clone(), *b));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            for bound in [lo, hi] {
                if bound.is_finite() && (x[j] - bound).abs() <= 1e-7 * scale {
                    let mut a = vec![0.0; n];
                    a[j] = 1.0;
                    act.push((a, bound));
                }
            }
        }
        if act.len() < n {
            return x;
        }
        let a = DMatrix::from_fn(act.len(), n, |i, j| act[i].0[j]);
        let b = DVector::from_iterator(act.len(), act.iter().map(|r| r.1));
        let svd = a.clone().svd(true, true);
        if svd.rank(1e-10 * svd.singular_values.max()) < n {
            return x;
        }
        let Ok(y) = svd.solve(&b, 1e-14) else { return x };
        let y: Vec<f64> = y.iter().copied().collect();
        let ok = self.violation(&y) <= 1e-12 * scale
            && self.objective(&y) <= self.objective(&x) + 1e-9 * scale
            && (a * DVector::from_column_slice(&y) - b).amax() <= 1e-11 * scale;
        if ok {
            y
        } else {
            x
        }
    }
}
