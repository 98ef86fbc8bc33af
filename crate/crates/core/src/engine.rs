//! Exact discrete-event simulation of one online run.
//!
//! A resource matched at time `a` with sampled duration `D` is busy during
//! `(a, a + D]`: an arrival at exactly `a + D` still finds it unavailable.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use crate::instance::{Instance, Tick};
use crate::policies::SeedVector;

/// What a policy sees of the current arrival: its position, its time and
/// the edges revealed with it. Future arrivals are never exposed.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalView<'a> {
    pub index: usize,
    pub time: Tick,
    pub neighbors: &'a [usize],
}

/// An available neighbor of the current arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub resource: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub resource: usize,
    /// The score the policy maximized (the reward itself for Greedy).
    pub reduced_price: f64,
    /// Seed of the chosen resource, for seeded policies.
    pub seed: Option<f64>,
}

/// An online matching rule. One value drives exactly one simulation.
pub trait Policy {
    /// Picks one of `available` (sorted by resource id) or rejects the
    /// arrival. Must return `None` only when `available` is empty.
    fn choose(
        &mut self,
        arrival: &ArrivalView<'_>,
        available: &[Candidate],
        seeds: &SeedVector,
    ) -> Option<Decision>;

    /// Called after every match with the time the resource frees up.
    fn observe_match(&mut self, _resource: usize, _time: Tick, _busy_until: Tick) {}
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn choose(
        &mut self,
        arrival: &ArrivalView<'_>,
        available: &[Candidate],
        seeds: &SeedVector,
    ) -> Option<Decision> {
        (**self).choose(arrival, available, seeds)
    }

    fn observe_match(&mut self, resource: usize, time: Tick, busy_until: Tick) {
        (**self).observe_match(resource, time, busy_until)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("policy chose resource {resource} at arrival {arrival}, which is {reason}")]
    ContractBreach {
        arrival: usize,
        resource: usize,
        reason: &'static str,
    },
}

/// Per-resource `busy_until`; `None` means never matched.
#[derive(Debug, Clone)]
pub struct AvailabilityState {
    busy_until: Vec<Option<Tick>>,
}

impl AvailabilityState {
    pub fn new(n_resources: usize) -> Self {
        AvailabilityState {
            busy_until: vec![None; n_resources],
        }
    }

    pub fn is_available(&self, resource: usize, time: Tick) -> bool {
        match self.busy_until[resource] {
            None => true,
            Some(until) => time > until,
        }
    }

    pub fn busy_until(&self, resource: usize) -> Option<Tick> {
        self.busy_until[resource]
    }

    pub fn occupy(&mut self, resource: usize, time: Tick, duration: Tick) -> Tick {
        let until = time + duration;
        self.busy_until[resource] = Some(until);
        until
    }
}

/// One line of a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalRecord {
    pub arrival_id: usize,
    pub matched: Option<usize>,
    pub reduced_price: Option<f64>,
    pub duration: Option<Tick>,
    /// Available neighbors at the moment of arrival.
    pub available: Vec<usize>,
    pub seed: Option<f64>,
}

/// Complete record of one run; enough to replay or audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingTrace {
    pub records: Vec<ArrivalRecord>,
    pub total_reward: f64,
}

impl MatchingTrace {
    /// Matched `(resource, arrival)` pairs in arrival order.
    pub fn matches(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(t, r)| r.matched.map(|i| (i, t)))
    }

    pub fn num_matched(&self) -> usize {
        self.records.iter().filter(|r| r.matched.is_some()).count()
    }

    /// Whether `resource` was free when `arrival` came in, whether or not
    /// the two are adjacent.
    pub fn resource_available_at(&self, instance: &Instance, resource: usize, arrival: usize) -> bool {
        let now = instance.time(arrival);
        self.records[..arrival]
            .iter()
            .enumerate()
            .rev()
            .find(|(_, r)| r.matched == Some(resource))
            .is_none_or(|(t, r)| now > instance.time(t) + r.duration.unwrap_or(0))
    }

    /// Writes one JSON object per arrival.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

/// Runs `policy` over the arrivals of `instance` in index order.
///
/// Durations are drawn by the engine from each resource's usage model using
/// `duration_rng`, so that different policies see identical duration
/// randomness for the same generator state. Deterministic usage consumes no
/// randomness.
pub fn simulate<P, R>(
    instance: &Instance,
    policy: &mut P,
    seeds: &SeedVector,
    duration_rng: &mut R,
) -> Result<MatchingTrace, SimError>
where
    P: Policy + ?Sized,
    R: Rng + ?Sized,
{
    let mut state = AvailabilityState::new(instance.num_resources());
    let mut records = Vec::with_capacity(instance.num_arrivals());
    let mut total_reward = 0.0;
    let mut candidates = Vec::new();
    for (index, arrival) in instance.arrivals().iter().enumerate() {
        candidates.clear();
        candidates.extend(
            arrival
                .neighbors
                .iter()
                .filter(|&&i| state.is_available(i, arrival.time))
                .map(|&i| Candidate {
                    resource: i,
                    reward: instance.reward(i),
                }),
        );
        let view = ArrivalView {
            index,
            time: arrival.time,
            neighbors: &arrival.neighbors,
        };
        let decision = policy.choose(&view, &candidates, seeds);
        let mut record = ArrivalRecord {
            arrival_id: arrival.id,
            matched: None,
            reduced_price: None,
            duration: None,
            available: candidates.iter().map(|c| c.resource).collect(),
            seed: None,
        };
        if let Some(dec) = decision {
            let i = dec.resource;
            if arrival.neighbors.binary_search(&i).is_err() {
                return Err(SimError::ContractBreach {
                    arrival: index,
                    resource: i,
                    reason: "not a neighbor",
                });
            }
            if !state.is_available(i, arrival.time) {
                return Err(SimError::ContractBreach {
                    arrival: index,
                    resource: i,
                    reason: "unavailable",
                });
            }
            let duration = instance.usage(i).sample(duration_rng);
            let until = state.occupy(i, arrival.time, duration);
            policy.observe_match(i, arrival.time, until);
            total_reward += instance.reward(i);
            record.matched = Some(i);
            record.reduced_price = Some(dec.reduced_price);
            record.duration = Some(duration);
            record.seed = dec.seed;
        }
        records.push(record);
    }
    Ok(MatchingTrace {
        records,
        total_reward,
    })
}

/// The last arrival `tau >= t` with `a(tau) <= a(t) + d`.
///
/// When some arrival falls in `(a(t), a(t) + d]` this is the last of them.
/// Otherwise it is the last arrival sharing `t`'s timestamp (which is `t`
/// itself when timestamps are distinct).
pub fn window_end(instance: &Instance, t: usize, d: Tick) -> usize {
    let arrivals = instance.arrivals();
    let limit = arrivals[t].time.saturating_add(d);
    let end = arrivals[t..].partition_point(|a| a.time <= limit);
    t + end - 1
}

/// [`window_end`] for every arrival.
pub fn window_ends(instance: &Instance, d: Tick) -> Vec<usize> {
    (0..instance.num_arrivals())
        .map(|t| window_end(instance, t, d))
        .collect()
}

/// 1-based period index of a time under periods `[k d, (k+1) d)`, shifted by
/// one more so that a period with no arrivals precedes the first one.
pub fn period_index(time: Tick, d: Tick) -> u64 {
    time / d + 2
}
