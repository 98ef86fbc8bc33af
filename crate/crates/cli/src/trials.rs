//! Parallel Monte Carlo with results independent of the worker count.

use rayon::prelude::*;

use omr_core::engine::simulate;
use omr_core::policies::{duration_rng, PolicyFactory};
use omr_core::stats::{Accumulator, Summary};
use omr_core::{Instance, SeedVector};

/// Trials per work unit. Fixed so that the merge order never depends on
/// scheduling.
pub const CHUNK: u64 = 256;

pub fn chunks(trials: u64) -> Vec<std::ops::Range<u64>> {
    (0..trials.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials))
        .collect()
}

/// Total reward of trials `0..trials` of `root`: trial `k` uses
/// `SeedVector::for_trial(root, k)` and `duration_rng(root, k)`.
pub fn reward_summary(instance: &Instance, factory: &PolicyFactory, trials: u64, root: u64) -> Summary {
    let parts: Vec<Accumulator> = chunks(trials)
        .into_par_iter()
        .map(|range| {
            let mut acc = Accumulator::default();
            for k in range {
                let mut policy = factory.build();
                let trace = simulate(
                    instance,
                    &mut policy,
                    &SeedVector::for_trial(root, k),
                    &mut duration_rng(root, k),
                )
                .expect("library policies only pick available neighbors");
                acc.push(trace.total_reward);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::default();
    for p in &parts {
        total.merge(p);
    }
    total.summary()
}
