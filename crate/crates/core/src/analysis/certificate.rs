use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::engine::{window_end, MatchingTrace};
use crate::instance::{Instance, Tick};
use crate::policies::TradeoffFunction;
use crate::stats::CompensatedSum;

/// Tolerance of the constraint (i) identity, relative to `max(1, reward)`.
pub const CONSTRAINT_I_TOL: f64 = 1e-12;

/// Dual variables fitted to one seeded run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualCertificate {
    /// One value per arrival.
    pub lambda: Vec<f64>,
    /// Nonzero `theta[(resource, arrival)]`.
    pub theta: BTreeMap<(usize, usize), f64>,
}

impl DualCertificate {
    /// `sum_{tau = from}^{to} theta[(resource, tau)]`.
    pub fn theta_sum(&self, resource: usize, from: usize, to: usize) -> f64 {
        self.theta
            .range((resource, from)..=(resource, to))
            .map(|(_, v)| *v)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn total(&self) -> f64 {
        let mut s: CompensatedSum = self.lambda.iter().copied().collect();
        for v in self.theta.values() {
            s.add(*v);
        }
        s.value()
    }
}

/// Per-resource deterministic durations.
pub(crate) fn durations(instance: &Instance) -> Result<Vec<Tick>, AnalysisError> {
    (0..instance.num_resources())
        .map(|i| {
            instance
                .usage(i)
                .deterministic()
                .ok_or(AnalysisError::NotDeterministic { resource: i })
        })
        .collect()
}

/// For each match `(i, t)` with seed `y`: `lambda_t = r_i (1 - g(y))` and
/// `theta[(i, t(d))] += r_i g(y)`, where `t(d)` is the last arrival within
/// `d_i` ticks of `a(t)`.
pub fn dual_fit(
    instance: &Instance,
    trace: &MatchingTrace,
    tradeoff: &TradeoffFunction,
) -> Result<DualCertificate, AnalysisError> {
    let d = durations(instance)?;
    let mut cert = DualCertificate {
        lambda: vec![0.0; trace.records.len()],
        theta: BTreeMap::new(),
    };
    for (t, rec) in trace.records.iter().enumerate() {
        let Some(i) = rec.matched else { continue };
        let y = rec.seed.ok_or(AnalysisError::MissingSeed { arrival: t })?;
        let r = instance.reward(i);
        let g = tradeoff.g(y);
        cert.lambda[t] = r * (1.0 - g);
        *cert.theta.entry((i, window_end(instance, t, d[i]))).or_insert(0.0) += r * g;
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintICheck {
    pub dual_total: f64,
    pub reward: f64,
    /// `|dual_total - reward|`.
    pub residual: f64,
    pub pass: bool,
}

/// Checks `sum lambda + sum theta = reward` of the run.
pub fn check_constraint_i(trace: &MatchingTrace, cert: &DualCertificate) -> ConstraintICheck {
    let dual_total = cert.total();
    let residual = (dual_total - trace.total_reward).abs();
    ConstraintICheck {
        dual_total,
        reward: trace.total_reward,
        residual,
        pass: residual <= CONSTRAINT_I_TOL * trace.total_reward.abs().max(1.0),
    }
}
