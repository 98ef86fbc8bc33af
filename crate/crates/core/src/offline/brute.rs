use std::collections::HashMap;

use super::{OfflineError, OfflineResult, Solution};
use crate::instance::{Instance, Tick};

pub const DEFAULT_SEARCH_CAP: f64 = 1e8;

/// Size of the unpruned decision tree: the product of `deg + 1` over arrivals.
pub fn search_size(instance: &Instance) -> f64 {
    (0..instance.num_arrivals())
        .map(|t| instance.neighbors(t).len() as f64 + 1.0)
        .product()
}

/// State before arrival `k`: per resource, how many ticks from `a(k)` until
/// it is free again (0 = free now). Values never exceed `d + 1`.
type Key = Vec<Tick>;

struct Search<'a> {
    instance: &'a Instance,
    d: Vec<Tick>,
    memo: HashMap<(usize, Key), (f64, Option<usize>)>,
}

impl Search<'_> {
    fn next_key(&self, k: usize, key: &[Tick], chosen: Option<usize>) -> Key {
        let now = self.instance.time(k);
        let next = self.instance.time(k + 1);
        key.iter()
            .enumerate()
            .map(|(i, &rem)| {
                let free_at = if chosen == Some(i) {
                    now + self.d[i] + 1
                } else if rem > 0 {
                    now + rem
                } else {
                    return 0;
                };
                free_at.saturating_sub(next)
            })
            .collect()
    }

    fn best(&mut self, k: usize, key: Key) -> f64 {
        if k == self.instance.num_arrivals() {
            return 0.0;
        }
        if let Some(&(v, _)) = self.memo.get(&(k, key.clone())) {
            return v;
        }
        let last = k + 1 == self.instance.num_arrivals();
        let tail = |s: &mut Self, choice| {
            if last {
                0.0
            } else {
                let nk = s.next_key(k, &key, choice);
                s.best(k + 1, nk)
            }
        };
        let mut value = tail(self, None);
        let mut choice = None;
        for &i in self.instance.neighbors(k) {
            if key[i] == 0 {
                let v = self.instance.reward(i) + tail(self, Some(i));
                if v > value {
                    value = v;
                    choice = Some(i);
                }
            }
        }
        self.memo.insert((k, key), (value, choice));
        value
    }
}

pub fn brute_force_opt(instance: &Instance) -> Result<OfflineResult, OfflineError> {
    brute_force_opt_with_cap(instance, DEFAULT_SEARCH_CAP)
}

/// Exact offline optimum by memoized depth-first search over per-arrival
/// choices.
pub fn brute_force_opt_with_cap(instance: &Instance, cap: f64) -> Result<OfflineResult, OfflineError> {
    let d = super::lp::per_resource_d(instance)?;
    let size = search_size(instance);
    if size > cap {
        return Err(OfflineError::TooLarge { size, cap });
    }
    let mut search = Search {
        instance,
        d,
        memo: HashMap::new(),
    };
    let n = instance.num_resources();
    let value = search.best(0, vec![0; n]);
    let mut matching = Vec::with_capacity(instance.num_arrivals());
    let mut key = vec![0; n];
    for k in 0..instance.num_arrivals() {
        let choice = search.memo[&(k, key.clone())].1;
        matching.push(choice);
        if k + 1 < instance.num_arrivals() {
            key = search.next_key(k, &key, choice);
        }
    }
    Ok(OfflineResult {
        value,
        solution: Solution::Matching(matching),
        method: super::Method::BruteForce,
    })
}
