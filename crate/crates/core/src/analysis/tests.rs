use super::*;
use crate::engine::{ArrivalRecord, MatchingTrace};
use crate::instance::{gen_example1, gen_kvv_window, Arrival, Instance, Resource};
use crate::policies::{SeedVector, TradeoffFunction};

fn beta() -> TradeoffFunction {
    TradeoffFunction::new(0.89).unwrap()
}

fn arrivals(layout: &[(u64, &[usize])]) -> Vec<Arrival> {
    layout.iter()
        .enumerate()
        .map(|(id, &(time, n))| Arrival {
            id,
            time,
            neighbors: n.to_vec(),
        })
        .collect()
}

#[test]
fn empty_trace_gives_zero_certificate() {
    let inst = Instance::with_unit_rewards(5, 2, Vec::new());
    let trace = MatchingTrace {
        records: Vec::new(),
        total_reward: 0.0,
    };
    let cert = dual_fit(&inst, &trace, &beta()).unwrap();
    assert!(cert.lambda.is_empty() && cert.theta.is_empty());
    assert!(check_constraint_i(&trace, &cert).pass);
}

#[test]
fn single_match_splits_the_reward() {
    let inst = Instance::with_unit_rewards(5, 1, arrivals(&[(0, &[0]), (3, &[0]), (9, &[])]));
    let y = 0.3;
    let trace = run_pr(&inst, 5, &beta(), &SeedVector::new(0).with_pin(0, 0, y));
    assert_eq!(trace.records[0].matched, Some(0));
    let cert = dual_fit(&inst, &trace, &beta()).unwrap();
    let g = beta().g(y);
    assert_eq!(cert.lambda, vec![1.0 - g, 0.0, 0.0]);
    // window of arrival 0 ends at arrival 1 (time 3 <= 5)
    assert_eq!(cert.theta.get(&(0, 1)), Some(&g));
    assert_eq!(cert.theta.len(), 1);
    assert!((cert.total() - 1.0).abs() < 1e-15);
}

#[test]
fn missing_seed_is_rejected() {
    let inst = Instance::with_unit_rewards(5, 1, arrivals(&[(0, &[0])]));
    let trace = MatchingTrace {
        records: vec![ArrivalRecord {
            arrival_id: 0,
            matched: Some(0),
            reduced_price: Some(1.0),
            duration: Some(5),
            available: vec![0],
            seed: None,
        }],
        total_reward: 1.0,
    };
    assert_eq!(
        dual_fit(&inst, &trace, &beta()).unwrap_err(),
        AnalysisError::MissingSeed { arrival: 0 }
    );
}

#[test]
fn constraint_i_on_example1() {
    let inst = gen_example1(10, 4, 12).unwrap();
    for root in 0..50 {
        let trace = run_pr(&inst, 10, &beta(), &SeedVector::new(root));
        let cert = dual_fit(&inst, &trace, &beta()).unwrap();
        let check = check_constraint_i(&trace, &cert);
        assert!(check.pass, "{check:?}");
    }
}

#[test]
fn perturbed_lambda_is_detected() {
    let inst = gen_example1(10, 4, 12).unwrap();
    let trace = run_pr(&inst, 10, &beta(), &SeedVector::new(1));
    let mut cert = dual_fit(&inst, &trace, &beta()).unwrap();
    cert.lambda[0] += 0.1;
    let check = check_constraint_i(&trace, &cert);
    assert!(!check.pass);
    assert!((check.residual - 0.1).abs() < 1e-12);
}

#[test]
fn sure_match_audits_to_its_reward() {
    let inst = Instance::with_unit_rewards(5, 1, arrivals(&[(0, &[0])]));
    let r = audit_edge(&inst, (0, 0), &beta(), 0.589, 1000, 4).unwrap();
    assert!((r.mean - 1.0).abs() < 1e-12 && r.se < 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.target, 0.589);
}

#[test]
fn example1_single_edge_arrival_passes() {
    let inst = gen_example1(10, 4, 12).unwrap();
    let r = audit_edge(&inst, (1, 1), &beta(), 0.589, 10_000, 7).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn high_alpha_fails_somewhere_on_kvv() {
    let inst = gen_kvv_window(6, 1, 20, Some(2)).unwrap();
    let reports = audit_instance(&inst, &beta(), 0.99, 2000, 3).unwrap();
    assert!(reports.iter().any(|r| r.verdict == Verdict::Fail));
}

#[test]
fn audit_input_errors() {
    let inst = Instance::with_unit_rewards(5, 2, arrivals(&[(0, &[0])]));
    assert_eq!(
        audit_edge(&inst, (1, 0), &beta(), 0.5, 1000, 0).unwrap_err(),
        AnalysisError::NotAnEdge { resource: 1, arrival: 0 }
    );
    assert_eq!(
        audit_edge(&inst, (0, 0), &beta(), 0.5, 10, 0).unwrap_err(),
        AnalysisError::TooFewSamples(10)
    );
}

#[test]
fn critical_threshold_boundaries() {
    let lonely = Instance::with_unit_rewards(5, 1, arrivals(&[(0, &[0])]));
    assert_eq!(critical_threshold(&lonely, (0, 0), &SeedVector::new(0), &beta()).unwrap(), 1.0);

    let rewards = |r1| {
        Instance::new(
            5,
            vec![
                Resource {
                    id: 0,
                    reward: 1.0,
                    usage: None,
                },
                Resource {
                    id: 1,
                    reward: r1,
                    usage: None,
                },
            ],
            arrivals(&[(0, &[0, 1])]),
        )
    };
    let seeds = SeedVector::new(0).with_pin(1, 0, 0.0);
    let equal = critical_threshold(&rewards(1.0), (0, 0), &seeds, &beta()).unwrap();
    assert!(equal.abs() < 1e-12, "{equal}");
    assert_eq!(critical_threshold(&rewards(2.0), (0, 0), &seeds, &beta()).unwrap(), 0.0);
}

#[test]
fn example1_scan_has_ordered_bands() {
    let inst = gen_example1(10, 4, 12).unwrap();
    for root in 0..10 {
        let rep = structural_scan(&inst, (0, 2), &beta(), ScanOptions::default(), root).unwrap();
        assert!(rep.z1 <= rep.z2);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.points.len(), DEFAULT_GRID);
        assert_eq!((rep.points[0].y1, rep.points[DEFAULT_GRID - 1].y1), (0.0, 1.0));
    }
}

#[test]
fn scan_without_history_is_all_available() {
    let inst = Instance::with_unit_rewards(10, 2, arrivals(&[(0, &[1]), (12, &[0, 1])]));
    let rep = structural_scan(&inst, (0, 1), &beta(), ScanOptions::default(), 5).unwrap();
    assert_eq!((rep.z1, rep.z2), (0.0, 0.0));
    assert!(rep.points.iter().all(|p| p.available && !p.matched_prev));
    assert!(rep.passed());
}

#[test]
fn scan_sees_the_unavailable_band() {
    // i = 0 has only arrival 0 before t: matched there for every y1, and
    // busy at t (time 10 = 0 + d), so the whole grid is the middle band.
    let inst = Instance::with_unit_rewards(10, 1, arrivals(&[(9, &[0]), (10, &[0])]));
    let rep = structural_scan(&inst, (0, 1), &beta(), ScanOptions::default(), 5).unwrap();
    assert!(rep.points.iter().all(|p| p.matched_prev && !p.available));
    assert_eq!((rep.z1, rep.z2), (0.0, 1.0));
    assert!(rep.passed(), "{:?}", rep.violations);
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let inst = gen_example1(10, 4, 12).unwrap();
    let seeds = SeedVector::new(9).with_pin(0, 0, 0.25).with_pin(0, 1, 1.0);
    let mut cx = Counterexample {
        check: ScanCheck::Bands,
        resource: 0,
        arrival: 2,
        y1: 0.25,
        y2: 1.0,
        root: 9,
        pins: seeds.pins().to_vec(),
        seeds: (0..2)
            .flat_map(|i| (0..3).map(move |e| (i, e)))
            .map(|(i, e)| (i, e, seeds.seed(i, e)))
            .collect(),
        detail: String::new(),
    };
    let trace = replay(&inst, &cx, &beta()).unwrap();
    assert_eq!(trace, run_pr(&inst, 10, &beta(), &seeds));
    cx.seeds[1].2 += 0.5;
    assert!(matches!(replay(&inst, &cx, &beta()), Err(AnalysisError::ReplayMismatch { .. })));
}
