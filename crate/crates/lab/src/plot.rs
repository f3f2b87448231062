//! Standalone SVG plots of result tables.

use std::fmt::Write;

use crate::ResultTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Points `(x, y, ±err)` drawn as a polyline with error bars.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = range(&mut xs.clone());
        let (y0, y1) = range(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let xv = f.x0 + u * (f.x1 - f.x0);
        let yv = f.y0 + u * (f.y1 - f.y0);
        let (x, y) = (f.px(xv), f.py(yv));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{}" stroke="black"/>"#, b + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{xv:.3}</text>"#, b + 18.0);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#, l - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#, l - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    s
}

/// Line plot with error bars and a legend.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.1.is_finite());
    let f = Frame::fit(
        pts().map(|p| p.0),
        pts().flat_map(|p| {
            let e = if p.2.is_finite() { p.2 } else { 0.0 };
            [p.1 - e, p.1 + e]
        }),
    );
    let mut s = open(title, xlabel, ylabel, &f);
    for (i, ser) in series.iter().enumerate() {
        let c = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|p| format!("{:.2},{:.2}", f.px(p.0), f.py(p.1)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path.join(" "));
        for &(x, y, e) in ser.points.iter().filter(|p| p.1.is_finite()) {
            let (px, py) = (f.px(x), f.py(y));
            if e.is_finite() && e > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{c}"/>"#,
                    f.py(y - e),
                    f.py(y + e)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{c}"/>"#);
        }
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Quantile fan: 10–90% and 25–75% bands around the median, one column per
/// stage.
pub fn quantile_fan(title: &str, xlabel: &str, ylabel: &str, stages: &[(f64, [f64; 5])]) -> String {
    let ok: Vec<&(f64, [f64; 5])> = stages.iter().filter(|s| s.1.iter().all(|q| q.is_finite())).collect();
    let f = Frame::fit(ok.iter().map(|s| s.0), ok.iter().flat_map(|s| s.1));
    let mut s = open(title, xlabel, ylabel, &f);
    let band = |lo: usize, hi: usize| {
        let upper: Vec<String> = ok.iter().map(|q| format!("{:.2},{:.2}", f.px(q.0), f.py(q.1[hi]))).collect();
        let lower: Vec<String> = ok.iter().rev().map(|q| format!("{:.2},{:.2}", f.px(q.0), f.py(q.1[lo]))).collect();
        format!("{} {}", upper.join(" "), lower.join(" "))
    };
    let _ = writeln!(s, r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.2"/>"##, band(0, 4));
    let _ = writeln!(s, r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.4"/>"##, band(1, 3));
    let median: Vec<String> = ok.iter().map(|q| format!("{:.2},{:.2}", f.px(q.0), f.py(q.1[2]))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, median.join(" "));
    for q in &ok {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##, f.px(q.0), f.py(q.1[2]));
    }
    s.push_str("</svg>\n");
    s
}

/// `log p̂` against `a^{1/k}` series from columns `x_col`, `p_col`, `se_col`.
fn log_series(t: &ResultTable, label: &str, rows: &[usize], p_col: &str, se_col: &str, k: usize) -> Option<Series> {
    let a = t.column("a")?;
    let p = t.column(p_col)?;
    let se = t.column(se_col)?;
    let points = rows
        .iter()
        .map(|&i| (a[i].powf(1.0 / k as f64), p[i].ln(), se[i] / p[i]))
        .filter(|q| q.1.is_finite())
        .collect();
    Some(Series { label: label.into(), points })
}

/// Plots for a finished table, as `(file stem, svg)` pairs.
pub fn plots_for(t: &ResultTable, k: usize) -> Vec<(String, String)> {
    let xlabel = format!("a^(1/{k})");
    let mut out = Vec::new();
    let all: Vec<usize> = (0..t.rows.len()).collect();
    match t.experiment.as_str() {
        "theorem1" => {
            if let Some(s) = log_series(t, "weighted typical face", &all, "p_hat", "stderr", k) {
                out.push(("theorem1".into(), line_plot("Deviation probability, process route", &xlabel, "log p", &[s])));
            }
        }
        "theorem2" => {
            let series: Vec<Series> = [("typical face (windows)", "p_hat", "stderr"), ("process route, 1/V", "p_process", "stderr_process")]
                .iter()
                .filter_map(|(l, p, se)| log_series(t, l, &all, p, se, k))
                .collect();
            out.push(("theorem2".into(), line_plot("Deviation probability, typical face", &xlabel, "log p", &series)));
        }
        "lemma6" => {
            let g = t.column("gamma").unwrap_or_default();
            let mut gammas: Vec<f64> = g.clone();
            gammas.dedup();
            let series: Vec<Series> = gammas
                .iter()
                .filter_map(|&gv| {
                    let rows: Vec<usize> = (0..g.len()).filter(|&i| g[i] == gv).collect();
                    log_series(t, &format!("gamma = {gv}"), &rows, "q_hat", "stderr", k)
                })
                .collect();
            out.push(("lemma6".into(), line_plot("Section cell volume bins", &xlabel, "log q", &series)));
        }
        "limitshape" => {
            let cols: Option<Vec<Vec<f64>>> = ["stage", "q10", "q25", "median", "q75", "q90"].iter().map(|c| t.column(c)).collect();
            if let Some(c) = cols {
                let stages: Vec<(f64, [f64; 5])> =
                    (0..t.rows.len()).map(|i| (c[0][i], [c[1][i], c[2][i], c[3][i], c[4][i], c[5][i]])).collect();
                out.push(("limitshape".into(), quantile_fan("Shape deviation along the schedule", "stage", "deviation", &stages)));
            }
        }
        "lemma1" => {
            if let (Some(r), Some(b)) = (t.column("defect"), t.column("ratio")) {
                let mut pts: Vec<(f64, f64, f64)> =
                    r.iter().zip(&b).filter(|(r, _)| **r > 0.0).map(|(r, b)| (r.log10(), *b, 0.0)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let s = Series { label: "d_P / 3|rho|^(1/3)".into(), points: pts };
                out.push(("lemma1".into(), line_plot("Projection inequality", "log10 |rho|", "ratio", &[s])));
            }
        }
        _ => {}
    }
    out
}
