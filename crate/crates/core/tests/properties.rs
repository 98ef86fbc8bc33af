use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omr_core::analysis::{check_constraint_i, dual_fit};
use omr_core::bounds::{f_eval, f_eval_expanded};
use omr_core::engine::{simulate, window_end};
use omr_core::fluid::eta_dp;
use omr_core::instance::{gen_random, load, parse, save, to_json, Arrival, RandomParams, Resource};
use omr_core::offline::{
    brute_force_opt_with_cap, lp_upper_bound, prune_window_constraints, solve_model, LpModel, Solution,
};
use omr_core::policies::{duration_rng, Greedy, PolicyFactory, PolicyKind, SeededPolicy};
use omr_core::{Instance, SeedVector, Tick, TradeoffFunction, UsageModel};

fn small_instance() -> impl Strategy<Value = Instance> {
    (1usize..=5, 1usize..=14, 0.2f64..0.8, 1u64..12, 1u64..5, any::<u64>()).prop_map(
        |(n_resources, n_arrivals, edge_prob, d, periods, seed)| {
            gen_random(&RandomParams {
                n_resources,
                n_arrivals,
                edge_prob,
                horizon: d * periods,
                d,
                reward_range: (0.25, 3.0),
                seed,
            })
            .unwrap()
        },
    )
}

fn usage_model() -> impl Strategy<Value = UsageModel> {
    prop_oneof![
        (1u64..15).prop_map(UsageModel::Deterministic),
        proptest::collection::btree_map(1u64..15, 1u32..10, 1..4).prop_map(|m| {
            let total: u32 = m.values().sum();
            let mut atoms: Vec<(Tick, f64)> = m.iter().map(|(&d, &w)| (d, w as f64 / total as f64)).collect();
            let head: f64 = atoms[..atoms.len() - 1].iter().map(|a| a.1).sum();
            atoms.last_mut().unwrap().1 = 1.0 - head;
            UsageModel::FiniteDiscrete(atoms)
        }),
    ]
}

fn tradeoff() -> TradeoffFunction {
    TradeoffFunction::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traces_only_use_available_neighbors(inst in small_instance(), root in any::<u64>(), kind_ix in 0usize..7) {
        let kind = PolicyKind::ALL[kind_ix];
        let mut policy = PolicyFactory::new(kind, &inst, tradeoff()).unwrap().build();
        let trace = simulate(&inst, &mut policy, &SeedVector::new(root), &mut duration_rng(root, 0)).unwrap();
        let d = inst.d_default();
        let mut busy: Vec<Option<Tick>> = vec![None; inst.num_resources()];
        let mut reward = 0.0;
        for (t, rec) in trace.records.iter().enumerate() {
            let now = inst.time(t);
            let free: Vec<usize> = inst.neighbors(t).iter().copied()
                .filter(|&i| busy[i].is_none_or(|u| now > u)).collect();
            prop_assert_eq!(&rec.available, &free);
            prop_assert_eq!(rec.matched.is_some(), !free.is_empty());
            if let Some(i) = rec.matched {
                prop_assert!(free.contains(&i));
                busy[i] = Some(now + d);
                reward += inst.reward(i);
            }
        }
        prop_assert!((reward - trace.total_reward).abs() < 1e-9);
    }

    #[test]
    fn runs_are_reproducible(inst in small_instance(), root in any::<u64>()) {
        let t = tradeoff();
        let d = inst.d_default();
        let run = || simulate(&inst, &mut SeededPolicy::periodic(d, t), &SeedVector::new(root), &mut duration_rng(root, 1)).unwrap();
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn certificate_identity_holds(inst in small_instance(), root in any::<u64>()) {
        let t = tradeoff();
        let trace = simulate(&inst, &mut SeededPolicy::periodic(inst.d_default(), t), &SeedVector::new(root), &mut duration_rng(root, 0)).unwrap();
        let cert = dual_fit(&inst, &trace, &t).unwrap();
        prop_assert!(check_constraint_i(&trace, &cert).pass);
        prop_assert!(cert.lambda.iter().all(|&l| l >= 0.0));
        prop_assert!(cert.theta.values().all(|&v| v >= 0.0));
        for (t_ix, rec) in trace.records.iter().enumerate() {
            if rec.matched.is_none() {
                prop_assert_eq!(cert.lambda[t_ix], 0.0);
            }
        }
    }

    #[test]
    fn window_end_is_the_last_arrival_in_reach(inst in small_instance(), d in 1u64..20) {
        for t in 0..inst.num_arrivals() {
            let e = window_end(&inst, t, d);
            prop_assert!(e >= t);
            prop_assert!(inst.time(e) <= inst.time(t) + d);
            if e + 1 < inst.num_arrivals() {
                prop_assert!(inst.time(e + 1) > inst.time(t) + d);
            }
        }
    }

    #[test]
    fn offline_sandwich(inst in small_instance()) {
        let opt = brute_force_opt_with_cap(&inst, f64::INFINITY).unwrap();
        let lp = lp_upper_bound(&inst).unwrap();
        prop_assert!(lp.value >= opt.value - 1e-6, "lp {} < opt {}", lp.value, opt.value);
        let greedy = simulate(&inst, &mut Greedy, &SeedVector::new(0), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        prop_assert!(greedy.total_reward >= 0.5 * opt.value - 1e-9);
        prop_assert!(greedy.total_reward <= opt.value + 1e-9);
        // the brute-force matching is feasible and achieves its value
        let Solution::Matching(m) = &opt.solution else { panic!() };
        let d = inst.d_default();
        let mut busy: Vec<Option<Tick>> = vec![None; inst.num_resources()];
        let mut total = 0.0;
        for (t, choice) in m.iter().enumerate() {
            if let Some(i) = *choice {
                prop_assert!(inst.neighbors(t).contains(&i));
                prop_assert!(busy[i].is_none_or(|u| inst.time(t) > u));
                busy[i] = Some(inst.time(t) + d);
                total += inst.reward(i);
            }
        }
        prop_assert!((total - opt.value).abs() < 1e-9);
    }

    #[test]
    fn pruning_preserves_the_optimum(inst in small_instance()) {
        let full = LpModel::build(&inst).unwrap();
        let pruned = prune_window_constraints(full.clone());
        prop_assert!(pruned.constraints.len() <= full.constraints.len());
        let a = solve_model(&full).unwrap().value;
        let b = solve_model(&pruned).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn eta_is_a_probability(usage in usage_model(), mut times in proptest::collection::vec(0u64..80, 0..25)) {
        times.sort_unstable();
        let p = eta_dp(&usage, &times);
        prop_assert_eq!(p.eta.len(), times.len());
        for (k, &e) in p.eta.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&e));
            if k > 0 && times[k] == times[k - 1] {
                // a unit free at the earlier copy is used there
                prop_assert!(e <= 1.0 - p.eta[k - 1] + 1e-12);
            }
        }
        if let Some(&e0) = p.eta.first() {
            prop_assert_eq!(e0, 1.0);
        }
    }

    #[test]
    fn both_forms_of_f_agree(z1 in 0.0f64..=1.0, dz in 0.0f64..=1.0, x in 0.0f64..=1.0, beta in 0.01f64..=1.0) {
        let z2 = z1 + dz * (1.0 - z1);
        let a = f_eval(z1, z2, x, beta).unwrap();
        let b = f_eval_expanded(z1, z2, x, beta).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()) * (1.0 / beta), "{a} vs {b}");
    }

    #[test]
    fn instance_json_round_trips(inst in small_instance()) {
        let text = to_json(&inst);
        prop_assert_eq!(parse(&text).unwrap(), inst);
    }

    #[test]
    fn seeds_do_not_depend_on_query_order(root in any::<u64>(), pairs in proptest::collection::vec((0usize..10, 0u64..1000), 1..20)) {
        let s = SeedVector::new(root);
        let forward: Vec<f64> = pairs.iter().map(|&(i, e)| s.seed(i, e)).collect();
        let backward: Vec<f64> = pairs.iter().rev().map(|&(i, e)| SeedVector::new(root).seed(i, e)).collect();
        let mut backward = backward;
        backward.reverse();
        prop_assert_eq!(forward, backward);
    }
}

#[test]
fn forms_of_f_agree_on_ten_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10_000 {
        let beta = rng.gen_range(0.05..=1.0);
        let z2: f64 = rng.gen();
        let z1 = z2 * rng.gen::<f64>();
        let x: f64 = rng.gen();
        let a = f_eval(z1, z2, x, beta).unwrap();
        let b = f_eval_expanded(z1, z2, x, beta).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b} at ({z1}, {z2}, {x}, {beta})");
    }
}

#[test]
fn case_split_picks_the_right_end_in_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let beta = rng.gen_range(0.05..=1.0);
        let z2: f64 = rng.gen();
        let z1 = z2 * rng.gen::<f64>();
        let (arg, _) = (0..=200)
            .map(|k| k as f64 / 200.0)
            .map(|x| (x, f_eval(z1, z2, x, beta).unwrap()))
            .fold((0.0, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
        let slack = 1.0 - z2 - beta * (1.0 - z1);
        if slack.abs() < 1e-9 {
            continue;
        }
        let expected = if slack >= 0.0 { 0.0 } else { 1.0 };
        assert_eq!(arg, expected, "z1 {z1} z2 {z2} beta {beta}");
    }
}

#[test]
fn greedy_is_half_competitive_on_generated_corpus() {
    for inst in omr_core::instance::small_corpus(40, 77) {
        let opt = brute_force_opt_with_cap(&inst, f64::INFINITY).unwrap().value;
        let greedy = simulate(&inst, &mut Greedy, &SeedVector::new(0), &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap()
            .total_reward;
        assert!(greedy >= 0.5 * opt - 1e-9);
    }
}

#[test]
fn saved_instances_load_back() {
    let dir = std::env::temp_dir().join(format!("omr-prop-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inst.json");
    let inst = Instance::new(
        7,
        vec![
            Resource { id: 0, reward: 1.5, usage: None },
            Resource {
                id: 1,
                reward: 2.0,
                usage: Some(UsageModel::FiniteDiscrete(vec![(2, 0.25), (9, 0.75)])),
            },
        ],
        vec![
            Arrival { id: 0, time: 0, neighbors: vec![0, 1] },
            Arrival { id: 1, time: 0, neighbors: vec![1] },
            Arrival { id: 2, time: 8, neighbors: vec![0] },
        ],
    );
    save(&inst, &path).unwrap();
    assert_eq!(load(&path).unwrap(), inst);
    std::fs::remove_dir_all(&dir).unwrap();
}
