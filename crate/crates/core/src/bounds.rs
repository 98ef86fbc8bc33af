//! The competitive-ratio bound of Periodic Reranking as a function of
//! `beta`.
//!
//! With `g(y) = exp(beta (y - 1))` and `G = g / beta`, the guarantee is the
//! minimum over `0 <= z1 <= z2 <= 1`, `x in [0, 1]` of
//!
//! `f = G(z2) - G(z1) + (1 - g(x))(1 - z1) + (1 - z2)(G(x) - G(0)) + z1 (1 - g(0))`,
//!
//! which is bounded below by `min{ min_z h(z), 1 - e^-beta }` with
//! `h(z) = (e^{beta (z - 1)} - e^-beta) / beta + (1 - e^-beta)(1 - z) / beta`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::policies::TradeoffFunction;

pub const MIN_GRID: usize = 256;
pub const MIN_PLOT_SAMPLES: usize = 100;
const GOLDEN_TOL: f64 = 1e-13;

#[derive(Debug, thiserror::Error)]
pub enum BoundError {
    #[error("beta must lie in (0, 1], got {0}")]
    Beta(f64),
    #[error("need 0 <= z1 <= z2 <= 1 and 0 <= x <= 1, got z1={z1}, z2={z2}, x={x}")]
    Domain { z1: f64, z2: f64, x: f64 },
    #[error("grid must have at least {MIN_GRID} points per axis, got {0}")]
    GridTooSmall(usize),
    #[error("plot needs at least {MIN_PLOT_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn tradeoff(beta: f64) -> Result<TradeoffFunction, BoundError> {
    TradeoffFunction::new(beta).map_err(|_| BoundError::Beta(beta))
}

fn check_domain(z1: f64, z2: f64, x: f64) -> Result<(), BoundError> {
    if (0.0..=1.0).contains(&z1) && (0.0..=1.0).contains(&z2) && z1 <= z2 && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(BoundError::Domain { z1, z2, x })
    }
}

/// `f(z1, z2, x)` as defined, term by term.
pub fn f_eval(z1: f64, z2: f64, x: f64, beta: f64) -> Result<f64, BoundError> {
    let t = tradeoff(beta)?;
    check_domain(z1, z2, x)?;
    Ok(f_raw(&t, z1, z2, x))
}

/// The same function after collecting the `g(0)` and `g(x)` terms.
pub fn f_eval_expanded(z1: f64, z2: f64, x: f64, beta: f64) -> Result<f64, BoundError> {
    let t = tradeoff(beta)?;
    check_domain(z1, z2, x)?;
    Ok(f_expanded(&t, z1, z2, x))
}

fn f_raw(t: &TradeoffFunction, z1: f64, z2: f64, x: f64) -> f64 {
    t.G(z2) - t.G(z1) + (1.0 - t.g(x)) * (1.0 - z1) + (1.0 - z2) * (t.G(x) - t.G(0.0)) + z1 * (1.0 - t.g(0.0))
}

fn f_expanded(t: &TradeoffFunction, z1: f64, z2: f64, x: f64) -> f64 {
    let b = t.beta();
    (t.g(z2) - t.g(z1)) / b + 1.0 - t.g(0.0) / b * (1.0 - z2 + b * z1) + t.g(x) / b * (1.0 - z2 + b * z1 - b)
}

/// The curve `h(z)` of the closed-form reduction.
pub fn curve(z: f64, beta: f64) -> f64 {
    let e = (-beta).exp();
    ((beta * (z - 1.0)).exp() - e) / beta + (1.0 - e) / beta * (1.0 - z)
}

/// The straight-line term `1 - e^-beta`.
pub fn line(beta: f64) -> f64 {
    1.0 - (-beta).exp()
}

/// Minimizer and minimum of a convex function on `[lo, hi]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, start: f64, end: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (start, end);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > GOLDEN_TOL {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        }
    }
    let mut best = ((lo + hi) / 2.0, f((lo + hi) / 2.0));
    for z in [start, end] {
        if f(z) < best.1 {
            best = (z, f(z));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub z1: f64,
    pub z2: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimumSource {
    /// Direct minimization of `f`.
    Refined,
    /// The closed-form lower bound.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub beta: f64,
    pub grid: usize,
    /// The smaller of `refined_minimum` and `closed_form`.
    pub minimum: f64,
    pub source: MinimumSource,
    /// Smallest value of `f` at grid points.
    pub grid_minimum: f64,
    pub grid_minimizer: Point,
    /// Exact minimum of `f`: over `x in {0, 1}` and `z1 in {0, z2}`, with a
    /// golden-section search in `z2` when `z1 = 0`.
    pub refined_minimum: f64,
    pub refined_minimizer: Point,
    /// `min_z h(z)`.
    pub curve_minimum: f64,
    pub curve_argmin: f64,
    /// `1 - e^-beta`.
    pub line_value: f64,
    /// `min(curve_minimum, line_value)`.
    pub closed_form: f64,
    /// `(z, h(z))` at evenly spaced `z`.
    pub curve_samples: Vec<(f64, f64)>,
}

/// Minimizes `f` for one `beta`.
///
/// `f` is affine in `g(x)`, so its minimum over `x` sits at `x = 0` or
/// `x = 1`; in `z1` it is concave, so the minimum over `z1 in [0, z2]` sits
/// at an end. With `z1 = 0` what remains is convex in `z2`; with `z1 = z2` it
/// is affine in `z2`.
pub fn min_f(beta: f64, grid: usize) -> Result<BoundReport, BoundError> {
    let t = tradeoff(beta)?;
    if grid < MIN_GRID {
        return Err(BoundError::GridTooSmall(grid));
    }
    let step = 1.0 / (grid - 1) as f64;
    let mut grid_minimum = f64::INFINITY;
    let mut grid_minimizer = Point { z1: 0.0, z2: 0.0, x: 0.0 };
    for a in 0..grid {
        let z1 = a as f64 * step;
        for b in a..grid {
            let z2 = b as f64 * step;
            for x in [0.0, 1.0] {
                let v = f_raw(&t, z1, z2, x);
                if v < grid_minimum {
                    grid_minimum = v;
                    grid_minimizer = Point { z1, z2, x };
                }
            }
        }
    }

    let mut refined_minimum = f64::INFINITY;
    let mut refined_minimizer = grid_minimizer;
    for x in [0.0, 1.0] {
        let (z2, v) = golden_min(|z2| f_raw(&t, 0.0, z2, x), 0.0, 1.0);
        if v < refined_minimum {
            refined_minimum = v;
            refined_minimizer = Point { z1: 0.0, z2, x };
        }
        for z in [0.0, 1.0] {
            let v = f_raw(&t, z, z, x);
            if v < refined_minimum {
                refined_minimum = v;
                refined_minimizer = Point { z1: z, z2: z, x };
            }
        }
    }

    let (curve_argmin, curve_minimum) = golden_min(|z| curve(z, beta), 0.0, 1.0);
    let line_value = line(beta);
    let closed_form = curve_minimum.min(line_value);
    let (minimum, source) = if closed_form <= refined_minimum {
        (closed_form, MinimumSource::ClosedForm)
    } else {
        (refined_minimum, MinimumSource::Refined)
    };
    let curve_samples = (0..=100)
        .map(|k| {
            let z = k as f64 / 100.0;
            (z, curve(z, beta))
        })
        .collect();
    Ok(BoundReport {
        beta,
        grid,
        minimum,
        source,
        grid_minimum,
        grid_minimizer,
        refined_minimum,
        refined_minimizer,
        curve_minimum,
        curve_argmin,
        line_value,
        closed_form,
        curve_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub minimum: f64,
}

pub fn beta_sweep(betas: &[f64], grid: usize) -> Result<Vec<SweepRow>, BoundError> {
    betas
        .iter()
        .map(|&beta| {
            min_f(beta, grid).map(|r| SweepRow {
                beta,
                minimum: r.minimum,
            })
        })
        .collect()
}

/// The row with the largest minimum (first one on ties).
pub fn sweep_argmax(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().fold(None, |best: Option<&SweepRow>, r| match best {
        Some(b) if b.minimum >= r.minimum => Some(b),
        _ => Some(r),
    })
}

/// `beta` from `lo` to `hi` inclusive in steps of `step`, rounded to 1e-9.
pub fn beta_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

/// SVG plot of the line `1 - e^-beta` and the curve `h` over `[0, 1]`.
pub fn plot_fig1(beta: f64, samples: usize) -> Result<String, BoundError> {
    tradeoff(beta)?;
    if samples < MIN_PLOT_SAMPLES {
        return Err(BoundError::TooFewSamples(samples));
    }
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 20.0, 30.0, 50.0);
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let z = k as f64 / (samples - 1) as f64;
            (z, curve(z, beta))
        })
        .collect();
    let l = line(beta);
    let lo = pts.iter().map(|p| p.1).fold(l, f64::min);
    let hi = pts.iter().map(|p| p.1).fold(l, f64::max);
    let (y_lo, y_hi) = (lo - 0.02, hi + 0.02);
    let sx = |x: f64| left + x * (w - left - right);
    let sy = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/><line x1="{0}" y1="{3}" x2="{0}" y2="{1}"/></g>"#,
        left,
        h - bottom,
        w - right,
        top
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12">"#);
    for k in 0..=5 {
        let x = k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.1}</text>"#,
            sx(x),
            h - bottom + 18.0
        );
        let y = y_lo + (y_hi - y_lo) * k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            left - 6.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle">beta = {beta}</text></g>"#,
        w / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<line id="line" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red" stroke-width="2"/>"#,
        sx(0.0),
        sy(l),
        sx(1.0),
        sy(l)
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline id="curve" fill="none" stroke="purple" stroke-width="2" points="{}"/>"#,
        path.join(" ")
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_fig1(beta: f64, samples: usize, out: &Path) -> Result<(), BoundError> {
    let svg = plot_fig1(beta, samples)?;
    std::fs::write(out, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        let e1 = 1.0 - (-1.0f64).exp();
        for x in [0.0, 0.3, 1.0] {
            assert!((f_eval(0.0, 0.0, x, 1.0).unwrap() - e1).abs() < 1e-12);
        }
        for beta in [0.3, 0.89, 1.0] {
            assert!((f_eval(1.0, 1.0, 0.4, beta).unwrap() - line(beta)).abs() < 1e-12);
        }
        let v = f_eval(0.0, 1.0, 1.0, 0.89).unwrap();
        assert!((v - (1.0 - (-0.89f64).exp()) / 0.89).abs() < 1e-12);
        assert!((v - 0.66219).abs() < 1e-5, "{v}");
    }

    #[test]
    fn domain_is_checked() {
        assert!(matches!(f_eval(0.6, 0.5, 0.0, 0.89), Err(BoundError::Domain { .. })));
        assert!(matches!(f_eval(0.0, 0.5, 1.5, 0.89), Err(BoundError::Domain { .. })));
        assert!(matches!(f_eval(0.0, 0.5, 0.5, 0.0), Err(BoundError::Beta(_))));
        assert!(matches!(min_f(0.89, 10), Err(BoundError::GridTooSmall(10))));
    }

    #[test]
    fn beta_089_clears_the_target() {
        let r = min_f(0.89, 256).unwrap();
        assert!(r.minimum >= 0.5893, "{r:?}");
        assert!(r.line_value > 0.5893 && r.curve_minimum >= 0.5893);
        assert!(r.refined_minimum <= r.grid_minimum + 1e-15);
        assert!(r.minimum <= line(0.89));
    }

    #[test]
    fn beta_one_value() {
        let r = min_f(1.0, 256).unwrap();
        assert!((r.minimum - 0.554).abs() < 0.0005, "{}", r.minimum);
    }

    #[test]
    fn grid_doubling_is_stable() {
        let a = min_f(0.89, 256).unwrap().minimum;
        let b = min_f(0.89, 512).unwrap().minimum;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn sweep_peaks_at_089() {
        let rows = beta_sweep(&beta_range(0.80, 1.00, 0.01), 256).unwrap();
        assert_eq!(rows.len(), 21);
        assert_eq!(sweep_argmax(&rows).unwrap().beta, 0.89);
        for r in &rows {
            assert!(r.minimum <= line(r.beta) + 1e-15);
        }
    }

    #[test]
    fn plot_contains_both_series() {
        let svg = plot_fig1(0.89, 200).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(r#"id="line""#) && svg.contains(r#"id="curve""#));
        assert_eq!(svg.matches(',').count(), 200);
        assert!((curve(1.0, 0.89) - 0.66219).abs() < 1e-5);
        assert!((line(0.89) - 0.58934).abs() < 1e-5);
        assert!(matches!(plot_fig1(0.89, 10), Err(BoundError::TooFewSamples(10))));
    }
}
