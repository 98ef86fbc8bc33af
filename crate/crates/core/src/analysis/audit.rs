use std::fmt;
use std::ops::Range;

use serde::Serialize;

use super::{dual_fit, run_pr, AnalysisError};
use crate::engine::window_end;
use crate::instance::Instance;
use crate::policies::{SeedVector, TradeoffFunction};
use crate::stats::Accumulator;

/// Smallest sample count accepted by the audits.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Monte Carlo estimate of `E[lambda_t + sum_{tau=t}^{t(d)} theta_{i tau}]`
/// for one edge, against the target `alpha r_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeAuditReport {
    pub resource: usize,
    pub arrival: usize,
    pub samples: u64,
    pub mean: f64,
    pub se: f64,
    pub target: f64,
    pub verdict: Verdict,
}

impl EdgeAuditReport {
    /// One-sided violation test: fails only when the mean is more than three
    /// standard errors below the target.
    pub fn from_accumulator(resource: usize, arrival: usize, acc: &Accumulator, target: f64) -> Self {
        let s = acc.summary();
        let verdict = if s.mean >= target - 3.0 * s.se {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        EdgeAuditReport {
            resource,
            arrival,
            samples: s.n,
            mean: s.mean,
            se: s.se,
            target,
            verdict,
        }
    }
}

/// Audits every edge of `instance` over the same `samples` seed vectors
/// `SeedVector::for_trial(root, k)`.
pub fn audit_instance(
    instance: &Instance,
    tradeoff: &TradeoffFunction,
    alpha: f64,
    samples: usize,
    root: u64,
) -> Result<Vec<EdgeAuditReport>, AnalysisError> {
    let edges: Vec<(usize, usize)> = instance.edges().collect();
    audit_edges(instance, &edges, tradeoff, alpha, samples, root)
}

pub fn audit_edge(
    instance: &Instance,
    edge: (usize, usize),
    tradeoff: &TradeoffFunction,
    alpha: f64,
    samples: usize,
    root: u64,
) -> Result<EdgeAuditReport, AnalysisError> {
    Ok(audit_edges(instance, &[edge], tradeoff, alpha, samples, root)?[0])
}

pub fn audit_edges(
    instance: &Instance,
    edges: &[(usize, usize)],
    tradeoff: &TradeoffFunction,
    alpha: f64,
    samples: usize,
    root: u64,
) -> Result<Vec<EdgeAuditReport>, AnalysisError> {
    if samples < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples(samples));
    }
    let accs = accumulate_edges(instance, edges, tradeoff, 0..samples as u64, root)?;
    Ok(edges
        .iter()
        .zip(&accs)
        .map(|(&(i, t), acc)| EdgeAuditReport::from_accumulator(i, t, acc, alpha * instance.reward(i)))
        .collect())
}

/// Per-edge samples of `lambda_t + sum_{tau=t}^{t(d)} theta_{i tau}` over
/// trials `trials` of `root`. Accumulators of consecutive ranges can be
/// merged.
pub fn accumulate_edges(
    instance: &Instance,
    edges: &[(usize, usize)],
    tradeoff: &TradeoffFunction,
    trials: Range<u64>,
    root: u64,
) -> Result<Vec<Accumulator>, AnalysisError> {
    let d = instance
        .shared_deterministic_d()
        .ok_or(AnalysisError::RequiresSharedDeterministic)?;
    for &(i, t) in edges {
        if t >= instance.num_arrivals() || instance.neighbors(t).binary_search(&i).is_err() {
            return Err(AnalysisError::NotAnEdge { resource: i, arrival: t });
        }
    }
    let ends: Vec<usize> = edges.iter().map(|&(_, t)| window_end(instance, t, d)).collect();
    let mut accs = vec![Accumulator::default(); edges.len()];
    for k in trials {
        let seeds = SeedVector::for_trial(root, k);
        let trace = run_pr(instance, d, tradeoff, &seeds);
        let cert = dual_fit(instance, &trace, tradeoff)?;
        for ((&(i, t), &end), acc) in edges.iter().zip(&ends).zip(&mut accs) {
            acc.push(cert.lambda[t] + cert.theta_sum(i, t, end));
        }
    }
    Ok(accs)
}
