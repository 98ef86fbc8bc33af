//! Coupled-seed scans of one edge `(i, t)` under Periodic Reranking.
//!
//! All seeds except `y1` (resource `i`, period before `t`'s) and `y2`
//! (resource `i`, `t`'s period) are fixed by a root seed. The scan sweeps
//! `y1` over a grid with `y2 = 1`, records whether `i` is matched in the
//! previous period, whether it is available at some arrival of `t`'s period
//! up to `t`, and the critical threshold at `t`, then checks the structure
//! these must have together with pointwise dual bounds at sampled `y2`.

use std::fmt;

use serde::Serialize;

use super::{dual_fit, run_pr, AnalysisError};
use crate::engine::{window_end, MatchingTrace};
use crate::instance::{Instance, Tick};
use crate::policies::{counter_word, Epoch, SeedVector, TradeoffFunction};

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_Y2_SAMPLES: usize = 8;
/// Midpoint grid size per axis for the conditional expectation.
pub const DEFAULT_EXPECTATION_GRID: usize = 32;
pub const SCAN_TOL: f64 = 1e-12;

const Y2_STREAM: u64 = 0x7932_0000_0000_0003;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanCheck {
    /// Matched-in-previous-period points, then available points among them,
    /// must form prefixes of the grid; unmatched points must be available.
    Bands,
    /// The previous-period match moves no earlier as `y1` grows.
    MatchOrder,
    /// `y_c(y1)` equals `y_c(1)` when unmatched and is at most `y_c(1)` when
    /// matched but unavailable.
    CriticalThreshold,
    /// `lambda_t(y1, y2) >= lambda_t(y1, 1) >= r_i (1 - g(y_c))` when available.
    LambdaBound,
    /// `theta sum >= 1(y2 < y_c) r_i g(y2)` when available.
    ThetaIndicator,
    /// `theta sum >= r_i g(y1)` when unavailable.
    ThetaUnavailable,
}

impl fmt::Display for ScanCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScanCheck::Bands => "bands",
            ScanCheck::MatchOrder => "match_order",
            ScanCheck::CriticalThreshold => "critical_threshold",
            ScanCheck::LambdaBound => "lambda_bound",
            ScanCheck::ThetaIndicator => "theta_indicator",
            ScanCheck::ThetaUnavailable => "theta_unavailable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub y1: f64,
    pub matched_prev: bool,
    pub available: bool,
    /// Arrival matched to `i` in the previous period.
    pub match_arrival: Option<usize>,
    pub critical: f64,
}

/// A failed check with everything needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub check: ScanCheck,
    pub resource: usize,
    pub arrival: usize,
    pub y1: f64,
    pub y2: f64,
    pub root: u64,
    pub pins: Vec<(usize, Epoch, f64)>,
    /// Every seed the run can consult, pins applied.
    pub seeds: Vec<(usize, Epoch, f64)>,
    pub detail: String,
}

impl Counterexample {
    pub fn seed_vector(&self) -> SeedVector {
        self.pins
            .iter()
            .fold(SeedVector::new(self.root), |s, &(i, e, y)| s.with_pin(i, e, y))
    }
}

/// Reruns the PR simulation of a counterexample.
pub fn replay(
    instance: &Instance,
    cx: &Counterexample,
    tradeoff: &TradeoffFunction,
) -> Result<MatchingTrace, AnalysisError> {
    let d = instance
        .shared_deterministic_d()
        .ok_or(AnalysisError::RequiresSharedDeterministic)?;
    let seeds = cx.seed_vector();
    for &(i, e, y) in &cx.seeds {
        if seeds.seed(i, e) != y {
            return Err(AnalysisError::ReplayMismatch { resource: i, epoch: e });
        }
    }
    Ok(run_pr(instance, d, tradeoff, &seeds))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralScanReport {
    pub resource: usize,
    pub arrival: usize,
    pub root: u64,
    /// Period of `t`; `y1` lives in the one before it.
    pub epoch: Epoch,
    pub points: Vec<ScanPoint>,
    pub z1: f64,
    pub z2: f64,
    pub critical_at_one: f64,
    pub y2_values: Vec<f64>,
    pub violations: Vec<Counterexample>,
    /// `E[lambda_t + theta sum]` over `(y1, y2)` at the fixed other seeds,
    /// by the midpoint rule. Informational.
    pub conditional_mean: f64,
}

impl StructuralScanReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub grid: usize,
    pub y2_samples: usize,
    pub expectation_grid: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid: DEFAULT_GRID,
            y2_samples: DEFAULT_Y2_SAMPLES,
            expectation_grid: DEFAULT_EXPECTATION_GRID,
        }
    }
}

struct Edge<'a> {
    instance: &'a Instance,
    tradeoff: &'a TradeoffFunction,
    d: Tick,
    i: usize,
    t: usize,
    epoch: Epoch,
    end: usize,
    root: u64,
}

struct Run {
    trace: MatchingTrace,
    lambda: f64,
    theta: f64,
}

impl Edge<'_> {
    fn pins(&self, y1: f64, y2: f64) -> Vec<(usize, Epoch, f64)> {
        let mut pins = Vec::with_capacity(2);
        if self.epoch > 0 {
            pins.push((self.i, self.epoch - 1, y1));
        }
        pins.push((self.i, self.epoch, y2));
        pins
    }

    fn seeds(&self, y1: f64, y2: f64) -> SeedVector {
        self.pins(y1, y2)
            .into_iter()
            .fold(SeedVector::new(self.root), |s, (i, e, y)| s.with_pin(i, e, y))
    }

    fn run(&self, y1: f64, y2: f64) -> Result<Run, AnalysisError> {
        let trace = run_pr(self.instance, self.d, self.tradeoff, &self.seeds(y1, y2));
        let cert = dual_fit(self.instance, &trace, self.tradeoff)?;
        Ok(Run {
            lambda: cert.lambda[self.t],
            theta: cert.theta_sum(self.i, self.t, self.end),
            trace,
        })
    }

    fn point(&self, y1: f64, run: &Run) -> ScanPoint {
        let inst = self.instance;
        let d = self.d;
        let match_arrival = if self.epoch == 0 {
            None
        } else {
            run.trace
                .matches()
                .find(|&(j, tau)| j == self.i && inst.time(tau) / d == self.epoch - 1)
                .map(|(_, tau)| tau)
        };
        let mut busy_until = None;
        let mut available = false;
        let mut matches = run.trace.matches().filter(|&(j, _)| j == self.i).peekable();
        for tau in 0..=self.t {
            while let Some(&(_, m)) = matches.peek() {
                if m >= tau {
                    break;
                }
                busy_until = Some(inst.time(m) + d);
                matches.next();
            }
            if inst.time(tau) / d == self.epoch && busy_until.is_none_or(|u| inst.time(tau) > u) {
                available = true;
                break;
            }
        }
        ScanPoint {
            y1,
            matched_prev: match_arrival.is_some(),
            available,
            match_arrival,
            critical: critical_from(inst, &run.trace, &self.seeds(y1, 1.0), self.i, self.t, d, self.tradeoff),
        }
    }

    fn counterexample(&self, check: ScanCheck, y1: f64, y2: f64, detail: String) -> Counterexample {
        let seeds = self.seeds(y1, y2);
        let last_epoch = self.instance.last_time().unwrap_or(0) / self.d;
        let mut all = Vec::new();
        for i in 0..self.instance.num_resources() {
            for e in 0..=last_epoch {
                all.push((i, e, seeds.seed(i, e)));
            }
        }
        Counterexample {
            check,
            resource: self.i,
            arrival: self.t,
            y1,
            y2,
            root: self.root,
            pins: self.pins(y1, y2),
            seeds: all,
            detail,
        }
    }
}

fn critical_from(
    instance: &Instance,
    trace: &MatchingTrace,
    seeds: &SeedVector,
    i: usize,
    t: usize,
    d: Tick,
    tradeoff: &TradeoffFunction,
) -> f64 {
    let epoch = instance.time(t) / d;
    let best = trace.records[t]
        .available
        .iter()
        .map(|&j| instance.reward(j) * (1.0 - tradeoff.g(seeds.seed(j, epoch))))
        .fold(0.0, f64::max);
    tradeoff.solve_seed(instance.reward(i), best).unwrap_or(0.0)
}

/// `y_c` at arrival `t` for resource `i`: the seed at which `i`'s reduced
/// price equals the best reduced price among available neighbors of `t`
/// when `i`'s seed in `t`'s period is 1 (0 when no such seed exists in
/// `[0, 1]`).
pub fn critical_threshold(
    instance: &Instance,
    edge: (usize, usize),
    seeds: &SeedVector,
    tradeoff: &TradeoffFunction,
) -> Result<f64, AnalysisError> {
    let (i, t) = edge;
    let d = instance
        .shared_deterministic_d()
        .ok_or(AnalysisError::RequiresSharedDeterministic)?;
    let seeds = seeds.clone().with_pin(i, instance.time(t) / d, 1.0);
    let trace = run_pr(instance, d, tradeoff, &seeds);
    Ok(critical_from(instance, &trace, &seeds, i, t, d, tradeoff))
}

pub fn structural_scan(
    instance: &Instance,
    edge: (usize, usize),
    tradeoff: &TradeoffFunction,
    options: ScanOptions,
    root: u64,
) -> Result<StructuralScanReport, AnalysisError> {
    let (i, t) = edge;
    let d = instance
        .shared_deterministic_d()
        .ok_or(AnalysisError::RequiresSharedDeterministic)?;
    if t >= instance.num_arrivals() || instance.neighbors(t).binary_search(&i).is_err() {
        return Err(AnalysisError::NotAnEdge { resource: i, arrival: t });
    }
    if options.grid < 2 {
        return Err(AnalysisError::GridTooSmall(options.grid));
    }
    let e = Edge {
        instance,
        tradeoff,
        d,
        i,
        t,
        epoch: instance.time(t) / d,
        end: window_end(instance, t, d),
        root,
    };
    let r_i = instance.reward(i);
    let y2_values: Vec<f64> = (0..options.y2_samples)
        .map(|k| (counter_word(root, Y2_STREAM, k as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();

    let mut points = Vec::with_capacity(options.grid);
    let mut one_runs = Vec::with_capacity(options.grid);
    for k in 0..options.grid {
        let y1 = k as f64 / (options.grid - 1) as f64;
        let run = e.run(y1, 1.0)?;
        points.push(e.point(y1, &run));
        one_runs.push(run);
    }
    let mut violations = Vec::new();

    // Bands.
    let first_unmatched = points.iter().position(|p| !p.matched_prev).unwrap_or(points.len());
    let first_unavailable = points[..first_unmatched]
        .iter()
        .position(|p| !p.available)
        .unwrap_or(first_unmatched);
    if let Some(p) = points[first_unmatched..].iter().find(|p| p.matched_prev || !p.available) {
        let detail = if p.matched_prev {
            format!("matched again at y1 = {} after a gap", p.y1)
        } else {
            format!("unmatched yet unavailable at y1 = {}", p.y1)
        };
        violations.push(e.counterexample(ScanCheck::Bands, p.y1, 1.0, detail));
    }
    if let Some(p) = points[first_unavailable..first_unmatched].iter().find(|p| p.available) {
        violations.push(e.counterexample(
            ScanCheck::Bands,
            p.y1,
            1.0,
            format!("available again at y1 = {} inside the unavailable band", p.y1),
        ));
    }
    let z2 = if first_unmatched == 0 { 0.0 } else { points[first_unmatched - 1].y1 };
    let z1 = if first_unavailable == 0 { 0.0 } else { points[first_unavailable - 1].y1 };

    // Match order.
    for w in points[..first_unmatched].windows(2) {
        if w[1].match_arrival < w[0].match_arrival {
            violations.push(e.counterexample(
                ScanCheck::MatchOrder,
                w[1].y1,
                1.0,
                format!(
                    "match moved from arrival {:?} at y1 = {} to {:?} at y1 = {}",
                    w[0].match_arrival, w[0].y1, w[1].match_arrival, w[1].y1
                ),
            ));
            break;
        }
    }

    // Critical threshold.
    let yc1 = points.last().map(|p| p.critical).unwrap_or(0.0);
    for p in &points {
        let bad = if !p.matched_prev {
            (p.critical - yc1).abs() > SCAN_TOL
        } else if !p.available {
            p.critical > yc1 + SCAN_TOL
        } else {
            false
        };
        if bad {
            violations.push(e.counterexample(
                ScanCheck::CriticalThreshold,
                p.y1,
                1.0,
                format!("y_c({}) = {} against y_c(1) = {yc1}", p.y1, p.critical),
            ));
            break;
        }
    }

    // Pointwise dual bounds.
    'outer: for (p, base) in points.iter().zip(&one_runs) {
        for &y2 in &y2_values {
            let run = e.run(p.y1, y2)?;
            let failure = if p.available {
                if run.lambda < base.lambda - SCAN_TOL || base.lambda < r_i * (1.0 - tradeoff.g(p.critical)) - SCAN_TOL {
                    Some((
                        ScanCheck::LambdaBound,
                        format!(
                            "lambda(y1, y2) = {}, lambda(y1, 1) = {}, r (1 - g(y_c)) = {}",
                            run.lambda,
                            base.lambda,
                            r_i * (1.0 - tradeoff.g(p.critical))
                        ),
                    ))
                } else {
                    let bound = if y2 < p.critical { r_i * tradeoff.g(y2) } else { 0.0 };
                    (run.theta < bound - SCAN_TOL).then(|| {
                        (
                            ScanCheck::ThetaIndicator,
                            format!("theta sum {} below {bound} (y_c = {})", run.theta, p.critical),
                        )
                    })
                }
            } else {
                let bound = r_i * tradeoff.g(p.y1);
                (run.theta < bound - SCAN_TOL).then(|| {
                    (
                        ScanCheck::ThetaUnavailable,
                        format!("theta sum {} below r g(y1) = {bound}", run.theta),
                    )
                })
            };
            if let Some((check, detail)) = failure {
                violations.push(e.counterexample(check, p.y1, y2, detail));
                break 'outer;
            }
        }
    }

    let m = options.expectation_grid.max(1);
    let mut total = crate::stats::CompensatedSum::default();
    for a in 0..m {
        for b in 0..m {
            let y1 = (a as f64 + 0.5) / m as f64;
            let y2 = (b as f64 + 0.5) / m as f64;
            let run = e.run(y1, y2)?;
            total.add(run.lambda + run.theta);
        }
    }

    Ok(StructuralScanReport {
        resource: i,
        arrival: t,
        root,
        epoch: e.epoch,
        points,
        z1,
        z2,
        critical_at_one: yc1,
        y2_values,
        violations,
        conditional_mean: total.value() / (m * m) as f64,
    })
}
