use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use omr_core::bounds::{beta_range, beta_sweep, min_f, sweep_argmax, write_fig1, BoundReport, SweepRow};
use omr_core::fluid::{eta_dp, eta_mc};
use omr_core::instance::PROBABILITY_SUM_TOLERANCE;
use omr_core::{Tick, UsageModel, DEFAULT_ALPHA, DEFAULT_BETA};

use crate::{header, load_instance, write_output, Status};

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Exit status 0 iff the minimum is at least this value.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Write the line-and-curve plot as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also sweep beta over 0.50..=1.00 in steps of 0.01.
    #[arg(long)]
    sweep: bool,
}

#[derive(Serialize)]
struct BoundsOutput {
    report: BoundReport,
    alpha: f64,
    meets_alpha: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_argmax: Option<SweepRow>,
}

pub fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<Status> {
    let mut report = min_f(args.beta, args.grid)?;
    report.curve_samples.clear();
    let meets_alpha = report.minimum >= args.alpha;
    let (sweep, argmax) = if args.sweep {
        let rows = beta_sweep(&beta_range(0.5, 1.0, 0.01), args.grid)?;
        let best = sweep_argmax(&rows).cloned();
        (Some(rows), best)
    } else {
        (None, None)
    };
    if let Some(path) = &args.svg {
        write_fig1(args.beta, 400, path)?;
    }
    eprintln!("{}", header(args.beta, args.alpha, &format!("grid={}", args.grid)));
    let out = BoundsOutput {
        report,
        alpha: args.alpha,
        meets_alpha,
        sweep,
        sweep_argmax: argmax,
    };
    write_output(None, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(if meets_alpha { Status::Pass } else { Status::Fail })
}

#[derive(Args)]
pub struct EtaArgs {
    /// Comma-separated nondecreasing arrival times.
    #[arg(long, value_delimiter = ',', conflicts_with = "instance")]
    times: Vec<Tick>,
    /// Duration distribution `d:p,d:p,...`.
    #[arg(long, conflicts_with_all = ["d", "instance"])]
    usage: Option<String>,
    /// Deterministic duration.
    #[arg(long, conflicts_with = "instance")]
    d: Option<Tick>,
    /// Take times and usage of one resource from an instance file.
    #[arg(long, requires = "resource")]
    instance: Option<PathBuf>,
    #[arg(long)]
    resource: Option<usize>,
    /// Monte Carlo samples to compare against.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_usage(s: &str) -> anyhow::Result<UsageModel> {
    let mut atoms = Vec::new();
    for part in s.split(',') {
        let (d, p) = part.split_once(':').with_context(|| format!("expected d:p, got {part:?}"))?;
        let d: Tick = d.trim().parse().with_context(|| format!("bad duration {d:?}"))?;
        let p: f64 = p.trim().parse().with_context(|| format!("bad probability {p:?}"))?;
        anyhow::ensure!(d >= 1, "durations must be positive");
        anyhow::ensure!(p > 0.0 && p <= 1.0, "probabilities must lie in (0, 1]");
        atoms.push((d, p));
    }
    atoms.sort_by_key(|a| a.0);
    anyhow::ensure!(atoms.windows(2).all(|w| w[0].0 < w[1].0), "durations must be distinct");
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    anyhow::ensure!(
        (total - 1.0).abs() <= PROBABILITY_SUM_TOLERANCE,
        "probabilities sum to {total}, not 1"
    );
    Ok(UsageModel::FiniteDiscrete(atoms))
}

pub fn cmd_eta(args: EtaArgs) -> anyhow::Result<Status> {
    let (times, usage) = match (&args.instance, args.resource) {
        (Some(path), Some(i)) => {
            let inst = load_instance(path)?;
            anyhow::ensure!(i < inst.num_resources(), "resource {i} out of range");
            let times: Vec<Tick> = inst.adjacent_arrivals(i).iter().map(|&t| inst.time(t)).collect();
            (times, inst.usage(i).clone())
        }
        _ => {
            let usage = match (&args.usage, args.d) {
                (Some(s), None) => parse_usage(s)?,
                (None, Some(d)) => {
                    anyhow::ensure!(d >= 1, "--d must be positive");
                    UsageModel::Deterministic(d)
                }
                _ => anyhow::bail!("give exactly one of --usage or --d, or use --instance with --resource"),
            };
            anyhow::ensure!(
                args.times.windows(2).all(|w| w[0] <= w[1]),
                "--times must be nondecreasing"
            );
            (args.times.clone(), usage)
        }
    };
    let exact = eta_dp(&usage, &times);
    anyhow::ensure!(args.mc != Some(0), "--mc must be positive");
    let mc = args.mc.map(|n| eta_mc(&usage, &times, n, &mut ChaCha8Rng::seed_from_u64(args.seed)));
    let mut text = String::from(if mc.is_some() { "k,time,eta,eta_mc,se\n" } else { "k,time,eta\n" });
    for (k, (&t, &e)) in times.iter().zip(&exact.eta).enumerate() {
        match &mc {
            Some((p, se)) => writeln!(text, "{k},{t},{e:.9},{:.9},{:.9}", p.eta[k], se[k])?,
            None => writeln!(text, "{k},{t},{e:.9}")?,
        }
    }
    write_output(None, &text)?;
    Ok(Status::Pass)
}
