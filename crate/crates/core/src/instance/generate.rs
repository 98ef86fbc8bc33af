//! Instance generators. Every generator is a pure function of its arguments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Arrival, Instance, InstanceError, Resource, Tick};

/// Two unit-reward resources and four arrivals with edges `{0,1}, {1}, {0,1},
/// {0}`. Consecutive gaps are `gap_small`, `gap_large`, `gap_small`.
///
/// A fixed ranking always loses one of the single-edge arrivals, while
/// ranking resource 0 first and then resource 1 first matches all four.
pub fn gen_example1(d: Tick, gap_small: Tick, gap_large: Tick) -> Result<Instance, InstanceError> {
    if !(gap_small < d && d < gap_large) {
        return Err(InstanceError::Rejected(format!(
            "example1 requires gap_small < d < gap_large, got {gap_small}, {d}, {gap_large}"
        )));
    }
    let t1 = gap_small;
    let t2 = t1 + gap_large;
    let t3 = t2 + gap_small;
    let arrivals = [(0, vec![0, 1]), (t1, vec![1]), (t2, vec![0, 1]), (t3, vec![0])]
        .into_iter()
        .enumerate()
        .map(|(id, (time, neighbors))| Arrival {
            id,
            time,
            neighbors,
        })
        .collect();
    Ok(Instance::with_unit_rewards(d, 2, arrivals))
}

/// Upper-triangular hard instances, one per block, each squeezed into a
/// single usage window.
///
/// Block `b` has `n` arrivals at times `b*(d+n) + j`. Arrival `j` of a block
/// is adjacent to `pi_b(j..n)` where `pi_b` is a block-local permutation
/// (identity when `permutation_seed` is `None`). Consecutive blocks are more
/// than `d` apart, so every resource is free again when a block starts.
pub fn gen_kvv_window(
    n: usize,
    blocks: usize,
    d: Tick,
    permutation_seed: Option<u64>,
) -> Result<Instance, InstanceError> {
    if n == 0 || blocks == 0 || d <= n as Tick {
        return Err(InstanceError::Rejected(format!(
            "kvv requires n >= 1, blocks >= 1 and d > n, got n={n}, blocks={blocks}, d={d}"
        )));
    }
    let mut rng = permutation_seed.map(ChaCha8Rng::seed_from_u64);
    let mut arrivals = Vec::with_capacity(n * blocks);
    let stride = d + n as Tick;
    for b in 0..blocks {
        let mut perm: Vec<usize> = (0..n).collect();
        if let Some(rng) = rng.as_mut() {
            perm.shuffle(rng);
        }
        for j in 0..n {
            arrivals.push(Arrival {
                id: arrivals.len(),
                time: b as Tick * stride + j as Tick,
                neighbors: perm[j..].to_vec(),
            });
        }
    }
    Ok(Instance::with_unit_rewards(d, n, arrivals))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub n_resources: usize,
    pub n_arrivals: usize,
    pub edge_prob: f64,
    pub horizon: Tick,
    pub d: Tick,
    pub reward_range: (f64, f64),
    pub seed: u64,
}

/// Random instance: arrival times i.i.d. uniform on `[0, horizon]` then
/// sorted, independent edges, uniform rewards, deterministic shared `d`.
pub fn gen_random(p: &RandomParams) -> Result<Instance, InstanceError> {
    if !(0.0..=1.0).contains(&p.edge_prob) {
        return Err(InstanceError::Rejected(format!(
            "edge_prob must lie in [0,1], got {}",
            p.edge_prob
        )));
    }
    if p.horizon == 0 || p.d == 0 {
        return Err(InstanceError::Rejected("horizon and d must be positive".into()));
    }
    let (lo, hi) = p.reward_range;
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return Err(InstanceError::Rejected(format!(
            "reward range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let resources = (0..p.n_resources)
        .map(|id| Resource {
            id,
            reward: if lo == hi { lo } else { rng.gen_range(lo..=hi) },
            usage: None,
        })
        .collect();
    let mut times: Vec<Tick> = (0..p.n_arrivals)
        .map(|_| rng.gen_range(0..=p.horizon))
        .collect();
    times.sort_unstable();
    let arrivals = times
        .into_iter()
        .enumerate()
        .map(|(id, time)| Arrival {
            id,
            time,
            neighbors: (0..p.n_resources)
                .filter(|_| rng.gen_bool(p.edge_prob))
                .collect(),
        })
        .collect();
    Ok(Instance::new(p.d, resources, arrivals))
}

/// `count` random instances with 2 to 6 resources, 4 to 20 arrivals and a
/// shared deterministic `d`, parameters drawn from `root`.
pub fn small_corpus(count: usize, root: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    (0..count)
        .map(|_| {
            let d = rng.gen_range(4..=15);
            let params = RandomParams {
                n_resources: rng.gen_range(2..=6),
                n_arrivals: rng.gen_range(4..=20),
                edge_prob: rng.gen_range(0.3..=0.7),
                horizon: d * rng.gen_range(2..=5),
                d,
                reward_range: (0.5, 2.0),
                seed: rng.gen(),
            };
            gen_random(&params).expect("parameters are in range")
        })
        .collect()
}
