//! Small estimators used by the experiment tables.

/// Two-sided normal quantile used for Wilson intervals (95%).
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
/// Returns `(0, 1)` when `n = 0`.
pub fn wilson(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Binomial proportion and its plug-in standard error.
pub fn proportion(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Weighted least squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Fits `y` against `x` with weights `w` (inverse variances). The slope
/// error is the model-based `1/√S_xx`, exact when the weights are.
pub fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let pts: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((&x, &y), &w)| (x, y, w))
        .filter(|p| p.0.is_finite() && p.1.is_finite() && p.2 > 0.0 && p.2.is_finite())
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx, slope_se: sxx.recip().sqrt() })
}

/// Ordinary least squares, with the residual-based slope error.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let mut fit = weighted_fit(x, y, &vec![1.0; x.len()])?;
    let n = x.len() as f64;
    if n > 2.0 {
        let rss: f64 = x.iter().zip(y).map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2)).sum();
        fit.slope_se *= (rss / (n - 2.0)).sqrt();
    } else {
        fit.slope_se = f64::NAN;
    }
    Some(fit)
}

/// Ratio estimator `Σ yᵢ / Σ xᵢ` over independent clusters `(xᵢ, yᵢ)`
/// with its delta-method standard error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> (f64, f64) {
    let n = num.len() as f64;
    let sx: f64 = den.iter().sum();
    if sx <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = num.iter().sum::<f64>() / sx;
    if num.len() < 2 {
        return (r, f64::NAN);
    }
    let ss: f64 = num.iter().zip(den).map(|(y, x)| (y - r * x).powi(2)).sum();
    (r, (ss * n / (n - 1.0)).sqrt() / sx)
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Number of adjacent increases `v[i+1] > v[i]` that exceed `k` combined
/// standard errors, and the number of raw increases.
pub fn inversions(v: &[f64], se: &[f64], k: f64) -> (usize, usize) {
    let mut significant = 0;
    let mut raw = 0;
    for i in 1..v.len() {
        let rise = v[i] - v[i - 1];
        if rise > 0.0 {
            raw += 1;
            if rise > k * se[i].hypot(se[i - 1]) {
                significant += 1;
            }
        }
    }
    (significant, raw)
}

/// A sequence passes the monotone check when it has at most one increase
/// and that increase lies within `k` combined standard errors.
pub fn non_increasing_up_to(v: &[f64], se: &[f64], k: f64) -> bool {
    let (significant, raw) = inversions(v, se, k);
    raw <= 1 && significant == 0
}

/// `|a − b| ≤ k·√(se_a² + se_b²)`.
pub fn agree_within(a: f64, se_a: f64, b: f64, se_b: f64, k: f64) -> bool {
    (a - b).abs() <= k * se_a.hypot(se_b)
}

/// Empirical `q`-quantile by linear interpolation of the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Standard error of the sample median from the order-statistic interval
/// `X_{(n/2 ± √n/2)}`, which covers the median with probability ≈ 68%.
pub fn median_se(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 4 {
        return f64::INFINITY;
    }
    let half = (n as f64).sqrt() / 2.0;
    let mid = n as f64 / 2.0;
    let lo = ((mid - half).floor().max(0.0)) as usize;
    let hi = ((mid + half).ceil() as usize).min(n - 1);
    (sorted[hi] - sorted[lo]) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // 8 of 10 at 95%: (0.4902, 0.9433)
        let (lo, hi) = wilson(8, 10, Z95);
        assert!((lo - 0.4902).abs() < 1e-4 && (hi - 0.9433).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0714).abs() < 1e-4);
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn wilson_brackets_the_proportion() {
        for n in [1, 7, 100, 10_000] {
            for s in [0, n / 3, n] {
                let (lo, hi) = wilson(s, n, Z95);
                let p = s as f64 / n as f64;
                assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn fit_recovers_exact_lines() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y: Vec<f64> = x.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = ols(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
        let g = weighted_fit(&x, &y, &[1.0, 4.0, 0.5, 2.0]).unwrap();
        assert!((g.slope + 0.5).abs() < 1e-12);
        assert!(weighted_fit(&[1.0], &[1.0], &[1.0]).is_none());
        assert!(weighted_fit(&[1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn weighted_fit_ignores_unusable_points() {
        let f = weighted_fit(&[1.0, 2.0, 3.0], &[0.0, f64::NEG_INFINITY, -2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_check_allows_one_small_rise() {
        let se = [0.1; 4];
        assert!(non_increasing_up_to(&[1.0, 0.8, 0.6, 0.5], &se, 2.0));
        assert!(non_increasing_up_to(&[1.0, 0.8, 0.9, 0.5], &se, 2.0));
        assert!(!non_increasing_up_to(&[1.0, 0.8, 1.2, 0.5], &se, 2.0));
        assert!(!non_increasing_up_to(&[1.0, 1.05, 0.6, 0.65], &se, 2.0));
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.5), 2.0);
        assert_eq!(quantile(&s, 0.125), 0.5);
        assert_eq!(quantile(&s, 1.0), 4.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn median_error_shrinks_like_root_n() {
        let grid = |n: usize| (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect::<Vec<_>>();
        let a = median_se(&grid(400));
        let b = median_se(&grid(40_000));
        // uniform sample: σ_median = 1/(2√n)
        assert!((a - 0.025).abs() < 0.003, "{a}");
        assert!((b - 0.0025).abs() < 0.0003, "{b}");
    }

    #[test]
    fn ratio_estimator_reduces_to_a_proportion() {
        // unit clusters: the delta-method error is the binomial one up to n/(n−1)
        let y: Vec<f64> = (0..400).map(|i| if i % 4 == 0 { 1.0 } else { 0.0 }).collect();
        let x = vec![1.0; 400];
        let (r, se) = ratio_estimate(&y, &x);
        assert!((r - 0.25).abs() < 1e-12);
        let binom = (0.25f64 * 0.75 / 400.0).sqrt();
        assert!((se / binom - (400.0f64 / 399.0).sqrt()).abs() < 1e-9);
        assert!(ratio_estimate(&[1.0], &[0.0]).0.is_nan());
    }

    #[test]
    fn mean_se_of_a_constant_is_zero() {
        assert_eq!(mean_se(&[2.0; 10]), (2.0, 0.0));
        let (m, se) = mean_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agreement_uses_combined_error() {
        assert!(agree_within(1.0, 0.3, 2.0, 0.4, 3.0));
        assert!(!agree_within(1.0, 0.03, 2.0, 0.04, 3.0));
    }
}
