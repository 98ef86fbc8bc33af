//! Problem instances: resources with rewards and usage models, and a
//! time-ordered list of arrivals with their incident edges.

mod file;
mod generate;

use std::fmt;

use rand::Rng;

pub use file::{load, parse, save, to_json};
pub use generate::{gen_example1, gen_kvv_window, gen_random, small_corpus, RandomParams};

/// Integer time. All arrival times and usage durations are whole ticks.
pub type Tick = u64;

/// Tolerance on the total mass of a discrete usage distribution.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// How long a resource stays busy after being matched.
#[derive(Debug, Clone, PartialEq)]
pub enum UsageModel {
    Deterministic(Tick),
    /// `(duration, probability)` atoms with strictly increasing durations.
    FiniteDiscrete(Vec<(Tick, f64)>),
}

impl UsageModel {
    /// `P(D <= x)`.
    pub fn cdf(&self, x: Tick) -> f64 {
        match self {
            UsageModel::Deterministic(d) => {
                if *d <= x {
                    1.0
                } else {
                    0.0
                }
            }
            UsageModel::FiniteDiscrete(atoms) => {
                atoms.iter().filter(|(dur, _)| *dur <= x).map(|(_, p)| p).sum()
            }
        }
    }

    /// `P(lo <= D < hi)`, summed over atoms so the result is exact for the
    /// given probabilities.
    pub fn prob_in(&self, lo: Tick, hi: Tick) -> f64 {
        match self {
            UsageModel::Deterministic(d) => {
                if lo <= *d && *d < hi {
                    1.0
                } else {
                    0.0
                }
            }
            UsageModel::FiniteDiscrete(atoms) => atoms
                .iter()
                .filter(|(dur, _)| lo <= *dur && *dur < hi)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// `P(D >= x)`: the probability that a unit matched `x` ticks ago is
    /// still busy now.
    pub fn still_busy_after(&self, x: Tick) -> f64 {
        if x == 0 {
            return 1.0;
        }
        1.0 - self.cdf(x - 1)
    }

    pub fn max_duration(&self) -> Tick {
        match self {
            UsageModel::Deterministic(d) => *d,
            UsageModel::FiniteDiscrete(atoms) => atoms.last().map(|a| a.0).unwrap_or(0),
        }
    }

    pub fn deterministic(&self) -> Option<Tick> {
        match self {
            UsageModel::Deterministic(d) => Some(*d),
            UsageModel::FiniteDiscrete(_) => None,
        }
    }

    /// Draws a duration by inverting the CDF at a uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tick {
        match self {
            UsageModel::Deterministic(d) => *d,
            UsageModel::FiniteDiscrete(atoms) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for &(dur, p) in atoms {
                    acc += p;
                    if u < acc {
                        return dur;
                    }
                }
                atoms.last().map(|a| a.0).unwrap_or(0)
            }
        }
    }

    fn check(&self, resource: Option<usize>, out: &mut Vec<Violation>) {
        match self {
            UsageModel::Deterministic(d) => {
                if *d == 0 {
                    out.push(Violation::NonPositiveDuration { resource });
                }
            }
            UsageModel::FiniteDiscrete(atoms) => {
                if atoms.is_empty() {
                    out.push(Violation::EmptyDistribution { resource });
                    return;
                }
                let mut sum = 0.0;
                for (k, &(dur, p)) in atoms.iter().enumerate() {
                    if dur == 0 {
                        out.push(Violation::NonPositiveDuration { resource });
                    }
                    if k > 0 && atoms[k - 1].0 >= dur {
                        out.push(Violation::DurationsNotIncreasing { resource });
                    }
                    if !(0.0..=1.0).contains(&p) {
                        out.push(Violation::InvalidProbability { resource, value: p });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    out.push(Violation::ProbabilitySum { resource, sum });
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resource {
    pub id: usize,
    pub reward: f64,
    /// Overrides the instance-wide default duration when present.
    pub usage: Option<UsageModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub id: usize,
    pub time: Tick,
    /// Sorted, duplicate-free resource ids.
    pub neighbors: Vec<usize>,
}

/// An invariant violation found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ResourceIdNotDense { index: usize, id: usize },
    ArrivalIdNotDense { index: usize, id: usize },
    DanglingResource { arrival: usize, resource: usize },
    TimesNotSorted { arrival: usize },
    NegativeReward { resource: usize },
    NonFiniteReward { resource: usize },
    NegativeTime { arrival: usize },
    NonPositiveDuration { resource: Option<usize> },
    EmptyDistribution { resource: Option<usize> },
    DurationsNotIncreasing { resource: Option<usize> },
    InvalidProbability { resource: Option<usize>, value: f64 },
    ProbabilitySum { resource: Option<usize>, sum: f64 },
}

struct Scope(Option<usize>);

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(i) => write!(f, "resource {i}"),
            None => write!(f, "d_default"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ResourceIdNotDense { index, id } => {
                write!(f, "resource ids not dense: position {index} has id {id}")
            }
            Violation::ArrivalIdNotDense { index, id } => {
                write!(f, "arrival ids not dense: position {index} has id {id}")
            }
            Violation::DanglingResource { arrival, resource } => {
                write!(f, "dangling resource id {resource} at arrival {arrival}")
            }
            Violation::TimesNotSorted { arrival } => {
                write!(f, "times not sorted at arrival {arrival}")
            }
            Violation::NegativeReward { resource } => {
                write!(f, "reward must be nonnegative (resource {resource})")
            }
            Violation::NonFiniteReward { resource } => {
                write!(f, "reward must be finite (resource {resource})")
            }
            Violation::NegativeTime { arrival } => {
                write!(f, "time must be nonnegative (arrival {arrival})")
            }
            Violation::NonPositiveDuration { resource } => {
                write!(f, "d must be positive ({})", Scope(*resource))
            }
            Violation::EmptyDistribution { resource } => {
                write!(f, "usage distribution has no atoms ({})", Scope(*resource))
            }
            Violation::DurationsNotIncreasing { resource } => {
                write!(f, "durations must be strictly increasing ({})", Scope(*resource))
            }
            Violation::InvalidProbability { resource, value } => {
                write!(f, "probability {value} outside [0,1] ({})", Scope(*resource))
            }
            Violation::ProbabilitySum { resource, sum } => {
                write!(f, "probabilities must sum to 1, got {sum} ({})", Scope(*resource))
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("rejected input: {0}")]
    Rejected(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// An immutable problem instance.
///
/// Construction never fails; use [`Instance::validate`] to find invariant
/// violations. Per-resource adjacency lists and resolved usage models are
/// computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    d_default: Tick,
    resources: Vec<Resource>,
    arrivals: Vec<Arrival>,
    usages: Vec<UsageModel>,
    adjacency: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(d_default: Tick, resources: Vec<Resource>, mut arrivals: Vec<Arrival>) -> Self {
        for a in &mut arrivals {
            a.neighbors.sort_unstable();
            a.neighbors.dedup();
        }
        let usages = resources
            .iter()
            .map(|r| {
                r.usage
                    .clone()
                    .unwrap_or(UsageModel::Deterministic(d_default))
            })
            .collect();
        let mut adjacency = vec![Vec::new(); resources.len()];
        for (t, a) in arrivals.iter().enumerate() {
            for &i in &a.neighbors {
                if let Some(list) = adjacency.get_mut(i) {
                    list.push(t);
                }
            }
        }
        Instance {
            d_default,
            resources,
            arrivals,
            usages,
            adjacency,
        }
    }

    /// Unit-reward resources `0..n` with the default duration `d`.
    pub fn with_unit_rewards(d: Tick, n: usize, arrivals: Vec<Arrival>) -> Self {
        let resources = (0..n)
            .map(|id| Resource {
                id,
                reward: 1.0,
                usage: None,
            })
            .collect();
        Instance::new(d, resources, arrivals)
    }

    pub fn d_default(&self) -> Tick {
        self.d_default
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn num_arrivals(&self) -> usize {
        self.arrivals.len()
    }

    pub fn reward(&self, resource: usize) -> f64 {
        self.resources[resource].reward
    }

    pub fn time(&self, arrival: usize) -> Tick {
        self.arrivals[arrival].time
    }

    pub fn neighbors(&self, arrival: usize) -> &[usize] {
        &self.arrivals[arrival].neighbors
    }

    /// Resolved usage model of a resource.
    pub fn usage(&self, resource: usize) -> &UsageModel {
        &self.usages[resource]
    }

    /// Arrival indices adjacent to `resource`, in arrival order.
    pub fn adjacent_arrivals(&self, resource: usize) -> &[usize] {
        &self.adjacency[resource]
    }

    /// All edges `(resource, arrival)` in arrival order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arrivals
            .iter()
            .enumerate()
            .flat_map(|(t, a)| a.neighbors.iter().map(move |&i| (i, t)))
    }

    pub fn num_edges(&self) -> usize {
        self.arrivals.iter().map(|a| a.neighbors.len()).sum()
    }

    pub fn last_time(&self) -> Option<Tick> {
        self.arrivals.last().map(|a| a.time)
    }

    /// The common duration when every resource uses the same deterministic
    /// duration.
    pub fn shared_deterministic_d(&self) -> Option<Tick> {
        let mut shared = None;
        for u in &self.usages {
            let d = u.deterministic()?;
            match shared {
                None => shared = Some(d),
                Some(s) if s != d => return None,
                _ => {}
            }
        }
        Some(shared.unwrap_or(self.d_default))
    }

    pub fn all_deterministic(&self) -> bool {
        self.usages.iter().all(|u| u.deterministic().is_some())
    }

    /// Returns every invariant violation; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.d_default == 0 {
            out.push(Violation::NonPositiveDuration { resource: None });
        }
        for (index, r) in self.resources.iter().enumerate() {
            if r.id != index {
                out.push(Violation::ResourceIdNotDense { index, id: r.id });
            }
            if !r.reward.is_finite() {
                out.push(Violation::NonFiniteReward { resource: index });
            } else if r.reward < 0.0 {
                out.push(Violation::NegativeReward { resource: index });
            }
            if let Some(u) = &r.usage {
                u.check(Some(index), &mut out);
            }
        }
        let n = self.resources.len();
        for (index, a) in self.arrivals.iter().enumerate() {
            if a.id != index {
                out.push(Violation::ArrivalIdNotDense { index, id: a.id });
            }
            if index > 0 && self.arrivals[index - 1].time > a.time {
                out.push(Violation::TimesNotSorted { arrival: index });
            }
            for &i in &a.neighbors {
                if i >= n {
                    out.push(Violation::DanglingResource {
                        arrival: index,
                        resource: i,
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Validates and wraps violations in an error.
    pub fn checked(self) -> Result<Self, InstanceError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(InstanceError::Invalid(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrival(id: usize, time: Tick, neighbors: &[usize]) -> Arrival {
        Arrival {
            id,
            time,
            neighbors: neighbors.to_vec(),
        }
    }

    #[test]
    fn example1_validates() {
        let inst = gen_example1(10, 1, 19).unwrap();
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn dangling_resource_is_reported() {
        let inst = Instance::with_unit_rewards(10, 2, vec![arrival(0, 0, &[0, 5])]);
        let v = inst.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("dangling resource id"));
    }

    #[test]
    fn unsorted_times_are_reported() {
        let inst =
            Instance::with_unit_rewards(10, 1, vec![arrival(0, 3, &[0]), arrival(1, 1, &[0])]);
        let v = inst.validate();
        assert_eq!(v, vec![Violation::TimesNotSorted { arrival: 1 }]);
        assert!(v[0].to_string().contains("times not sorted"));
    }

    #[test]
    fn bad_distributions_are_reported() {
        let resources = vec![Resource {
            id: 0,
            reward: 1.0,
            usage: Some(UsageModel::FiniteDiscrete(vec![(5, 0.5), (3, 0.4)])),
        }];
        let v = Instance::new(10, resources, vec![]).validate();
        assert!(v.contains(&Violation::DurationsNotIncreasing { resource: Some(0) }));
        assert!(v.iter().any(|x| matches!(x, Violation::ProbabilitySum { .. })));
    }

    #[test]
    fn cdf_is_exact_on_atoms() {
        let u = UsageModel::FiniteDiscrete(vec![(5, 0.25), (15, 0.75)]);
        assert_eq!(u.cdf(4), 0.0);
        assert_eq!(u.cdf(5), 0.25);
        assert_eq!(u.cdf(14), 0.25);
        assert_eq!(u.cdf(15), 1.0);
        assert_eq!(u.still_busy_after(5), 1.0);
        assert_eq!(u.still_busy_after(6), 0.75);
        assert_eq!(u.still_busy_after(16), 0.0);
        assert_eq!(u.prob_in(0, 5), 0.0);
        assert_eq!(u.prob_in(5, 6), 0.25);
        let d = UsageModel::Deterministic(10);
        assert_eq!(d.cdf(9), 0.0);
        assert_eq!(d.cdf(10), 1.0);
        assert_eq!(d.still_busy_after(10), 1.0);
        assert_eq!(d.still_busy_after(11), 0.0);
    }

    #[test]
    fn shared_d_requires_identical_deterministic_usage() {
        let mut inst = gen_example1(10, 1, 19).unwrap();
        assert_eq!(inst.shared_deterministic_d(), Some(10));
        let mut res = inst.resources().to_vec();
        res[1].usage = Some(UsageModel::Deterministic(7));
        inst = Instance::new(10, res, inst.arrivals().to_vec());
        assert_eq!(inst.shared_deterministic_d(), None);
        assert!(inst.all_deterministic());
    }

    #[test]
    fn neighbors_are_normalized() {
        let inst = Instance::with_unit_rewards(10, 3, vec![arrival(0, 0, &[2, 0, 2])]);
        assert_eq!(inst.neighbors(0), &[0, 2]);
        assert_eq!(inst.adjacent_arrivals(2), &[0]);
        assert!(inst.adjacent_arrivals(1).is_empty());
    }
}
