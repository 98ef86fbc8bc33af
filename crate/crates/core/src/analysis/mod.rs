//! Dual fitting of Periodic Reranking runs and the checks built on it.

mod audit;
mod certificate;
mod scan;

pub use audit::{accumulate_edges, audit_edge, audit_edges, audit_instance, EdgeAuditReport, Verdict, MIN_SAMPLES};
pub use certificate::{check_constraint_i, dual_fit, ConstraintICheck, DualCertificate, CONSTRAINT_I_TOL};
pub use scan::{
    critical_threshold, replay, structural_scan, Counterexample, ScanCheck, ScanOptions, ScanPoint,
    StructuralScanReport, DEFAULT_EXPECTATION_GRID, DEFAULT_GRID, DEFAULT_Y2_SAMPLES, SCAN_TOL,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{simulate, MatchingTrace};
use crate::instance::{Instance, Tick};
use crate::policies::{Epoch, SeedVector, SeededPolicy, TradeoffFunction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("arrival {arrival} is matched but its trace line has no seed")]
    MissingSeed { arrival: usize },
    #[error("resource {resource} has stochastic usage")]
    NotDeterministic { resource: usize },
    #[error("requires deterministic usage with one shared d")]
    RequiresSharedDeterministic,
    #[error("({resource}, {arrival}) is not an edge")]
    NotAnEdge { resource: usize, arrival: usize },
    #[error("at least {MIN_SAMPLES} samples are needed, got {0}")]
    TooFewSamples(usize),
    #[error("scan grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("recorded seed of ({resource}, {epoch}) does not match the regenerated one")]
    ReplayMismatch { resource: usize, epoch: Epoch },
}

/// Periodic Reranking under deterministic usage; consumes no duration
/// randomness.
pub(crate) fn run_pr(instance: &Instance, d: Tick, tradeoff: &TradeoffFunction, seeds: &SeedVector) -> MatchingTrace {
    let mut policy = SeededPolicy::periodic(d, *tradeoff);
    simulate(instance, &mut policy, seeds, &mut ChaCha8Rng::seed_from_u64(0))
        .expect("seeded policies only pick available neighbors")
}

#[cfg(test)]
mod tests;
