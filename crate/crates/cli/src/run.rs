use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use omr_core::engine::simulate;
use omr_core::offline::{brute_force_opt_with_cap, lp_upper_bound, OfflineError, OfflineResult, DEFAULT_SEARCH_CAP};
use omr_core::policies::{duration_rng, PolicyFactory};
use omr_core::stats::Summary;
use omr_core::{Instance, PolicyKind, SeedVector, TradeoffFunction, DEFAULT_ALPHA, DEFAULT_BETA};

use crate::trials::reward_summary;
use crate::{header, instance_name, load_instance, write_output, Status};

#[derive(Args)]
pub struct RunArgs {
    instance: PathBuf,
    #[arg(long, default_value = "pr")]
    policy: PolicyKind,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also solve the brute-force optimum and the LP bound and report ratios.
    #[arg(long)]
    baselines: bool,
    /// Brute-force search-size cap used with --baselines.
    #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
    bf_cap: f64,
    /// Write the trace of trial 0 as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct BaselineRow {
    method: String,
    value: Option<f64>,
    ratio: Option<f64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct RunReport {
    instance: String,
    policy: String,
    beta: f64,
    seed: u64,
    reward: Summary,
    baselines: Vec<BaselineRow>,
}

fn factory(kind: PolicyKind, instance: &Instance, beta: f64) -> anyhow::Result<PolicyFactory> {
    let tradeoff = TradeoffFunction::new(beta)?;
    Ok(PolicyFactory::new(kind, instance, tradeoff)?)
}

fn check_trials(trials: u64) -> anyhow::Result<()> {
    anyhow::ensure!(trials > 0, "--trials must be positive");
    Ok(())
}

fn baseline_row(result: Result<OfflineResult, OfflineError>, mean: f64, label: &str) -> BaselineRow {
    match result {
        Ok(r) => BaselineRow {
            method: r.method.to_string(),
            value: Some(r.value),
            ratio: ratio(mean, r.value),
            note: None,
        },
        Err(e) => BaselineRow {
            method: label.to_string(),
            value: None,
            ratio: None,
            note: Some(e.to_string()),
        },
    }
}

fn ratio(mean: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| mean / baseline)
}

pub fn cmd_run(args: RunArgs) -> anyhow::Result<Status> {
    check_trials(args.trials)?;
    let inst = load_instance(&args.instance)?;
    let factory = factory(args.policy, &inst, args.beta)?;
    let reward = reward_summary(&inst, &factory, args.trials, args.seed);

    if let Some(path) = &args.trace {
        let trace = simulate(
            &inst,
            &mut factory.build(),
            &SeedVector::for_trial(args.seed, 0),
            &mut duration_rng(args.seed, 0),
        )?;
        std::fs::write(path, trace.to_jsonl()).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let mut baselines = Vec::new();
    if args.baselines {
        baselines.push(baseline_row(
            brute_force_opt_with_cap(&inst, args.bf_cap),
            reward.mean,
            "brute_force",
        ));
        baselines.push(baseline_row(lp_upper_bound(&inst), reward.mean, "lp"));
    }

    let report = RunReport {
        instance: instance_name(&args.instance),
        policy: args.policy.to_string(),
        beta: args.beta,
        seed: args.seed,
        reward,
        baselines,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(Status::Pass);
    }
    println!(
        "{}",
        header(
            args.beta,
            DEFAULT_ALPHA,
            &format!("root={} policy={} trials={}", args.seed, report.policy, args.trials)
        )
    );
    println!("instance {}", report.instance);
    println!(
        "reward mean {:.6} se {:.6} min {} max {}",
        reward.mean, reward.se, reward.min, reward.max
    );
    for b in &report.baselines {
        match (b.value, b.ratio) {
            (Some(v), Some(r)) => println!("{} {v:.6} ratio {r:.6}", b.method),
            (Some(v), None) => println!("{} {v:.6}", b.method),
            _ => println!("{} unavailable: {}", b.method, b.note.as_deref().unwrap_or("")),
        }
    }
    Ok(Status::Pass)
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Baseline {
    Brute,
    Lp,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "greedy,ranking,pg,random,ror,pr,fluid")]
    policies: Vec<PolicyKind>,
    /// Brute force falls back to the LP bound when the search is too large.
    #[arg(long, value_enum, default_value = "brute")]
    baseline: Baseline,
    #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
    bf_cap: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareRow {
    instance: String,
    policy: String,
    trials: u64,
    mean: Option<f64>,
    se: Option<f64>,
    baseline: Option<f64>,
    baseline_method: String,
    ratio: Option<f64>,
    note: String,
}

pub fn cmd_compare(args: CompareArgs) -> anyhow::Result<Status> {
    check_trials(args.trials)?;
    let tradeoff = TradeoffFunction::new(args.beta)?;
    let mut rows = Vec::new();
    let mut worst: Vec<Option<f64>> = vec![None; args.policies.len()];
    for path in &args.instances {
        let inst = load_instance(path)?;
        let name = instance_name(path);
        let (base, base_note) = match args.baseline {
            Baseline::Lp => (lp_upper_bound(&inst)?, String::new()),
            Baseline::Brute => match brute_force_opt_with_cap(&inst, args.bf_cap) {
                Ok(r) => (r, String::new()),
                Err(OfflineError::TooLarge { size, cap }) => (
                    lp_upper_bound(&inst)?,
                    format!("brute force search size {size:.3e} exceeds cap {cap:.3e}; LP bound used"),
                ),
                Err(e) => return Err(e.into()),
            },
        };
        for (p, &kind) in args.policies.iter().enumerate() {
            let mut row = CompareRow {
                instance: name.clone(),
                policy: kind.to_string(),
                trials: args.trials,
                mean: None,
                se: None,
                baseline: Some(base.value),
                baseline_method: base.method.to_string(),
                ratio: None,
                note: base_note.clone(),
            };
            match PolicyFactory::new(kind, &inst, tradeoff) {
                Ok(factory) => {
                    let s = reward_summary(&inst, &factory, args.trials, args.seed);
                    row.mean = Some(s.mean);
                    row.se = Some(s.se);
                    row.ratio = ratio(s.mean, base.value);
                    if let Some(r) = row.ratio {
                        worst[p] = Some(worst[p].map_or(r, |w: f64| w.min(r)));
                    }
                }
                Err(e) => row.note = e.to_string(),
            }
            rows.push(row);
        }
    }
    for (p, &kind) in args.policies.iter().enumerate() {
        rows.push(CompareRow {
            instance: "worst".into(),
            policy: kind.to_string(),
            trials: args.trials,
            mean: None,
            se: None,
            baseline: None,
            baseline_method: String::new(),
            ratio: worst[p],
            note: String::new(),
        });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    eprintln!(
        "{}",
        header(args.beta, DEFAULT_ALPHA, &format!("root={} trials={}", args.seed, args.trials))
    );
    write_output(args.out.as_ref(), &text)?;
    Ok(Status::Pass)
}
