//! Online policies.
//!
//! Apart from Greedy, every policy is a seeded reduced-price greedy rule:
//! each resource carries a uniform seed `y` for its current epoch, and the
//! arrival is matched to the available neighbor maximizing
//! `r (1 - g(y))` with `g(y) = exp(beta (y - 1))`. The policies differ only
//! in when epochs advance (see [`RerankSchedule`]). Ties go to the smallest
//! resource id.

mod seeds;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use seeds::{counter_word, duration_rng, trial_root, Epoch, SeedVector};

use crate::engine::{ArrivalView, Candidate, Decision, Policy};
use crate::fluid::FluidProfiles;
use crate::instance::{Instance, Tick};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PolicyError {
    #[error("beta must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("unknown policy '{0}' (expected greedy, ranking, pg, random, ror, pr or fluid)")]
    Unknown(String),
    #[error("{0} requires deterministic shared d")]
    RequiresSharedDeterministic(PolicyKind),
}

/// `g(y) = exp(beta (y - 1))` and its antiderivative `G(y) = g(y) / beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffFunction {
    beta: f64,
}

impl TradeoffFunction {
    pub fn new(beta: f64) -> Result<Self, PolicyError> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(TradeoffFunction { beta })
        } else {
            Err(PolicyError::InvalidBeta(beta))
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn g(&self, y: f64) -> f64 {
        (self.beta * (y - 1.0)).exp()
    }

    #[allow(non_snake_case)]
    pub fn G(&self, y: f64) -> f64 {
        self.g(y) / self.beta
    }

    /// The seed `y` in `[0, 1]` with `reward (1 - g(y)) = price`, if one
    /// exists.
    pub fn solve_seed(&self, reward: f64, price: f64) -> Option<f64> {
        if reward <= 0.0 {
            return None;
        }
        let target = 1.0 - price / reward;
        if target <= 0.0 {
            return None;
        }
        let y = 1.0 + target.ln() / self.beta;
        if (0.0..=1.0).contains(&y) {
            Some(y)
        } else if y > 1.0 && y - 1.0 < 1e-15 {
            Some(1.0)
        } else if y < 0.0 && y > -1e-15 {
            Some(0.0)
        } else {
            None
        }
    }
}

impl Default for TradeoffFunction {
    fn default() -> Self {
        TradeoffFunction {
            beta: crate::DEFAULT_BETA,
        }
    }
}

/// `reward (1 - g(seed))`.
pub fn reduced_price(reward: f64, seed: f64, tradeoff: &TradeoffFunction) -> f64 {
    reward * (1.0 - tradeoff.g(seed))
}

/// When a resource draws a fresh seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RerankSchedule {
    /// One seed for the whole horizon (Ranking, Perturbed Greedy).
    Never,
    /// Fresh seeds at every arrival (Random).
    EveryArrival,
    /// Fresh seeds for all resources at times `0, d, 2d, ...` (PR).
    EveryPeriod(Tick),
    /// A resource draws a fresh seed each time it comes back from a match.
    OnReturn,
}

/// Match history a policy keeps for itself.
#[derive(Debug, Clone, Default)]
pub struct ReturnLog {
    matches: Vec<u64>,
    busy_until: Vec<Option<Tick>>,
}

impl ReturnLog {
    pub fn new(n_resources: usize) -> Self {
        ReturnLog {
            matches: vec![0; n_resources],
            busy_until: vec![None; n_resources],
        }
    }

    pub fn record(&mut self, resource: usize, busy_until: Tick) {
        if resource >= self.matches.len() {
            self.matches.resize(resource + 1, 0);
            self.busy_until.resize(resource + 1, None);
        }
        self.matches[resource] += 1;
        self.busy_until[resource] = Some(busy_until);
    }

    /// Number of matches of `resource` whose busy interval ended before
    /// `time`.
    pub fn completed_returns(&self, resource: usize, time: Tick) -> u64 {
        match self.busy_until.get(resource).copied().flatten() {
            None => 0,
            Some(until) if time > until => self.matches[resource],
            Some(_) => self.matches[resource] - 1,
        }
    }
}

/// Epoch whose seed `resource` uses at the given arrival.
pub fn epoch_of(
    schedule: RerankSchedule,
    resource: usize,
    arrival_index: usize,
    arrival_time: Tick,
    log: &ReturnLog,
) -> Epoch {
    match schedule {
        RerankSchedule::Never => 0,
        RerankSchedule::EveryArrival => arrival_index as Epoch,
        RerankSchedule::EveryPeriod(d) => arrival_time / d,
        RerankSchedule::OnReturn => log.completed_returns(resource, arrival_time),
    }
}

/// Highest reward, smallest id on ties. Records the reward as its price.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Policy for Greedy {
    fn choose(&mut self, _: &ArrivalView<'_>, available: &[Candidate], _: &SeedVector) -> Option<Decision> {
        let mut best: Option<&Candidate> = None;
        for c in available {
            if best.is_none_or(|b| c.reward > b.reward) {
                best = Some(c);
            }
        }
        best.map(|c| Decision {
            resource: c.resource,
            reduced_price: c.reward,
            seed: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scoring {
    /// Maximize `r (1 - g(y))`.
    ReducedPrice,
    /// Minimize `y`, ignoring rewards.
    SeedOnly,
}

/// Reduced-price greedy over seeds that refresh on a [`RerankSchedule`].
#[derive(Debug, Clone)]
pub struct SeededPolicy {
    schedule: RerankSchedule,
    scoring: Scoring,
    tradeoff: TradeoffFunction,
    log: ReturnLog,
}

impl SeededPolicy {
    pub fn new(schedule: RerankSchedule, scoring: Scoring, tradeoff: TradeoffFunction) -> Self {
        SeededPolicy {
            schedule,
            scoring,
            tradeoff,
            log: ReturnLog::default(),
        }
    }

    /// Periodic Reranking with period `d`.
    pub fn periodic(d: Tick, tradeoff: TradeoffFunction) -> Self {
        SeededPolicy::new(RerankSchedule::EveryPeriod(d), Scoring::ReducedPrice, tradeoff)
    }

    pub fn perturbed_greedy(tradeoff: TradeoffFunction) -> Self {
        SeededPolicy::new(RerankSchedule::Never, Scoring::ReducedPrice, tradeoff)
    }

    pub fn schedule(&self) -> RerankSchedule {
        self.schedule
    }

    pub fn epoch(&self, resource: usize, arrival: &ArrivalView<'_>) -> Epoch {
        epoch_of(self.schedule, resource, arrival.index, arrival.time, &self.log)
    }
}

impl Policy for SeededPolicy {
    fn choose(
        &mut self,
        arrival: &ArrivalView<'_>,
        available: &[Candidate],
        seeds: &SeedVector,
    ) -> Option<Decision> {
        let mut best: Option<(f64, Decision)> = None;
        for c in available {
            let y = seeds.seed(c.resource, self.epoch(c.resource, arrival));
            let price = reduced_price(c.reward, y, &self.tradeoff);
            let score = match self.scoring {
                Scoring::ReducedPrice => price,
                Scoring::SeedOnly => -y,
            };
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((
                    score,
                    Decision {
                        resource: c.resource,
                        reduced_price: price,
                        seed: Some(y),
                    },
                ));
            }
        }
        best.map(|(_, d)| d)
    }

    fn observe_match(&mut self, resource: usize, _time: Tick, busy_until: Tick) {
        self.log.record(resource, busy_until);
    }
}

/// Fluid Reranking: the seed of resource `i` at arrival `t` is the
/// availability-weighted sum of fresh per-arrival ranks over `i`'s recent
/// adjacent arrivals (see [`crate::fluid::fluid_seed`]). Per-arrival ranks
/// are the seeds at epoch = arrival index.
#[derive(Debug, Clone)]
pub struct FluidReranking {
    tradeoff: TradeoffFunction,
    profiles: Arc<FluidProfiles>,
}

impl FluidReranking {
    pub fn new(profiles: Arc<FluidProfiles>, tradeoff: TradeoffFunction) -> Self {
        FluidReranking { tradeoff, profiles }
    }
}

impl Policy for FluidReranking {
    fn choose(
        &mut self,
        arrival: &ArrivalView<'_>,
        available: &[Candidate],
        seeds: &SeedVector,
    ) -> Option<Decision> {
        let mut best: Option<Decision> = None;
        for c in available {
            let y = crate::fluid::fluid_seed(&self.profiles, c.resource, arrival.index, arrival.time, |tau| {
                seeds.seed(c.resource, tau as Epoch)
            });
            let price = reduced_price(c.reward, y, &self.tradeoff);
            if best.is_none_or(|b| price > b.reduced_price) {
                best = Some(Decision {
                    resource: c.resource,
                    reduced_price: price,
                    seed: Some(y),
                });
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Greedy,
    /// Fixed ranking by seed, ignoring rewards.
    Ranking,
    /// Perturbed Greedy: fixed seeds, reduced prices.
    Pg,
    /// Fresh seeds at every arrival.
    Random,
    /// Rerank on return.
    Ror,
    /// Periodic Reranking.
    Pr,
    Fluid,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::Greedy,
        PolicyKind::Ranking,
        PolicyKind::Pg,
        PolicyKind::Random,
        PolicyKind::Ror,
        PolicyKind::Pr,
        PolicyKind::Fluid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Ranking => "ranking",
            PolicyKind::Pg => "pg",
            PolicyKind::Random => "random",
            PolicyKind::Ror => "ror",
            PolicyKind::Pr => "pr",
            PolicyKind::Fluid => "fluid",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| PolicyError::Unknown(s.to_string()))
    }
}

/// Builds fresh policy values for repeated runs on one instance.
#[derive(Debug, Clone)]
pub struct PolicyFactory {
    kind: PolicyKind,
    tradeoff: TradeoffFunction,
    period: Option<Tick>,
    profiles: Option<Arc<FluidProfiles>>,
}

impl PolicyFactory {
    pub fn new(kind: PolicyKind, instance: &Instance, tradeoff: TradeoffFunction) -> Result<Self, PolicyError> {
        let period = match kind {
            PolicyKind::Pr => Some(
                instance
                    .shared_deterministic_d()
                    .ok_or(PolicyError::RequiresSharedDeterministic(kind))?,
            ),
            _ => None,
        };
        let profiles = match kind {
            PolicyKind::Fluid => Some(Arc::new(FluidProfiles::new(instance))),
            _ => None,
        };
        Ok(PolicyFactory {
            kind,
            tradeoff,
            period,
            profiles,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn build(&self) -> Box<dyn Policy + Send> {
        let t = self.tradeoff;
        match self.kind {
            PolicyKind::Greedy => Box::new(Greedy),
            PolicyKind::Ranking => Box::new(SeededPolicy::new(RerankSchedule::Never, Scoring::SeedOnly, t)),
            PolicyKind::Pg => Box::new(SeededPolicy::perturbed_greedy(t)),
            PolicyKind::Random => Box::new(SeededPolicy::new(RerankSchedule::EveryArrival, Scoring::ReducedPrice, t)),
            PolicyKind::Ror => Box::new(SeededPolicy::new(RerankSchedule::OnReturn, Scoring::ReducedPrice, t)),
            PolicyKind::Pr => Box::new(SeededPolicy::periodic(self.period.expect("checked in new"), t)),
            PolicyKind::Fluid => Box::new(FluidReranking::new(
                self.profiles.clone().expect("built in new"),
                t,
            )),
        }
    }
}
