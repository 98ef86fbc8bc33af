//! The single-unit availability process driven by a resource's own arrivals.
//!
//! A unit starts free. At each arrival where it is free it is used for an
//! independent duration `D ~ F`; a unit used at `s` is free again at `t`
//! iff `t > s + D` (the same boundary rule as the engine). `eta[k]` is the
//! probability that the unit is free at the `k`-th arrival.

use rand::Rng;

use crate::instance::{Instance, Tick, UsageModel};

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityProfile {
    pub times: Vec<Tick>,
    pub eta: Vec<f64>,
}

/// Exact availability probabilities by renewal recursion.
///
/// The unit is free at `t` iff for the last arrival `s < t` at which it was
/// used, `D` kept it busy through arrival `t - 1` but not through `t`:
///
/// `eta[t] = sum_{s<t} eta[s] * P(times[t-1] - times[s] <= D < times[t] - times[s])`.
///
/// Terms with `times[t-1] - times[s]` beyond the largest duration vanish and
/// are skipped.
pub fn eta_dp(usage: &UsageModel, times: &[Tick]) -> AvailabilityProfile {
    let max_d = usage.max_duration();
    let mut eta = Vec::with_capacity(times.len());
    for t in 0..times.len() {
        if t == 0 {
            eta.push(1.0);
            continue;
        }
        let prev = times[t - 1];
        let now = times[t];
        let mut p = 0.0;
        for s in (0..t).rev() {
            let lo = prev - times[s];
            if lo > max_d {
                break;
            }
            if eta[s] > 0.0 {
                p += eta[s] * usage.prob_in(lo, now - times[s]);
            }
        }
        eta.push(p.clamp(0.0, 1.0));
    }
    AvailabilityProfile {
        times: times.to_vec(),
        eta,
    }
}

/// Monte Carlo estimate of the same probabilities, plus binomial standard
/// errors.
pub fn eta_mc<R: Rng + ?Sized>(
    usage: &UsageModel,
    times: &[Tick],
    samples: usize,
    rng: &mut R,
) -> (AvailabilityProfile, Vec<f64>) {
    let mut free_counts = vec![0u64; times.len()];
    for _ in 0..samples {
        let mut busy_until: Option<Tick> = None;
        for (k, &t) in times.iter().enumerate() {
            if busy_until.is_none_or(|u| t > u) {
                free_counts[k] += 1;
                busy_until = Some(t + usage.sample(rng));
            }
        }
    }
    let n = samples as f64;
    let eta: Vec<f64> = free_counts.iter().map(|&c| c as f64 / n).collect();
    let se = eta.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    (
        AvailabilityProfile {
            times: times.to_vec(),
            eta,
        },
        se,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceProfile {
    /// Arrival indices adjacent to the resource.
    pub arrivals: Vec<usize>,
    pub times: Vec<Tick>,
    pub eta: Vec<f64>,
    pub usage: UsageModel,
}

/// Availability profiles of every resource over its adjacent arrivals.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidProfiles {
    resources: Vec<ResourceProfile>,
}

impl FluidProfiles {
    pub fn new(instance: &Instance) -> Self {
        let resources = (0..instance.num_resources())
            .map(|i| {
                let arrivals = instance.adjacent_arrivals(i).to_vec();
                let times: Vec<Tick> = arrivals.iter().map(|&t| instance.time(t)).collect();
                let usage = instance.usage(i).clone();
                let eta = eta_dp(&usage, &times).eta;
                ResourceProfile {
                    arrivals,
                    times,
                    eta,
                    usage,
                }
            })
            .collect();
        FluidProfiles { resources }
    }

    pub fn resource(&self, i: usize) -> &ResourceProfile {
        &self.resources[i]
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// `eta` of `resource` at arrival `arrival`, if adjacent.
    pub fn eta_at(&self, resource: usize, arrival: usize) -> Option<f64> {
        let p = &self.resources[resource];
        p.arrivals.binary_search(&arrival).ok().map(|k| p.eta[k])
    }
}

/// Seed of `resource` at arrival `t` (arriving at time `now`) under Fluid
/// Reranking:
///
/// `y = sum over adjacent tau <= t of P(D >= now - a(tau)) * eta(tau) * z(tau)`
///
/// where `z(tau)` is the fresh rank drawn at adjacent arrival `tau`. The
/// weight is the probability that a unit used at `tau` would still be busy
/// at `now`, which is 1 for `tau = t`.
pub fn fluid_seed<F>(profiles: &FluidProfiles, resource: usize, t: usize, now: Tick, mut z: F) -> f64
where
    F: FnMut(usize) -> f64,
{
    let p = &profiles.resources[resource];
    let end = p.arrivals.partition_point(|&tau| tau <= t);
    let max_d = p.usage.max_duration();
    let mut y = 0.0;
    for k in (0..end).rev() {
        let age = now - p.times[k];
        if age > max_d {
            break;
        }
        let w = p.usage.still_busy_after(age) * p.eta[k];
        if w > 0.0 {
            y += w * z(p.arrivals[k]);
        }
    }
    y
}
