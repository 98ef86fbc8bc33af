use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;

use omr_core::analysis::{
    accumulate_edges, structural_scan, EdgeAuditReport, ScanOptions, StructuralScanReport, Verdict, DEFAULT_GRID,
    DEFAULT_Y2_SAMPLES, MIN_SAMPLES,
};
use omr_core::stats::Accumulator;
use omr_core::{TradeoffFunction, DEFAULT_ALPHA, DEFAULT_BETA};

use crate::{header, instance_name, load_instance, write_output, Status};

/// Trials per audit work unit.
const AUDIT_CHUNK: u64 = 1000;

#[derive(Args)]
pub struct AuditArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(serde::Serialize)]
struct AuditRow<'a> {
    instance: &'a str,
    i: usize,
    t: usize,
    #[serde(rename = "N")]
    n: u64,
    mean: f64,
    se: f64,
    target: f64,
    verdict: Verdict,
}

pub fn cmd_audit(args: AuditArgs) -> anyhow::Result<Status> {
    anyhow::ensure!(
        args.trials >= MIN_SAMPLES as u64,
        "--trials must be at least {MIN_SAMPLES}, got {}",
        args.trials
    );
    let inst = load_instance(&args.instance)?;
    let tradeoff = TradeoffFunction::new(args.beta)?;
    let edges: Vec<(usize, usize)> = inst.edges().collect();
    let ranges: Vec<_> = (0..args.trials.div_ceil(AUDIT_CHUNK))
        .map(|c| c * AUDIT_CHUNK..((c + 1) * AUDIT_CHUNK).min(args.trials))
        .collect();
    let parts = ranges
        .into_par_iter()
        .map(|r| accumulate_edges(&inst, &edges, &tradeoff, r, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut accs = vec![Accumulator::default(); edges.len()];
    for part in &parts {
        for (a, p) in accs.iter_mut().zip(part) {
            a.merge(p);
        }
    }
    let reports: Vec<EdgeAuditReport> = edges
        .iter()
        .zip(&accs)
        .map(|(&(i, t), a)| EdgeAuditReport::from_accumulator(i, t, a, args.alpha * inst.reward(i)))
        .collect();
    let failures = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();

    let name = instance_name(&args.instance);
    let text = if args.json {
        serde_json::to_string_pretty(&reports)? + "\n"
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &reports {
            w.serialize(AuditRow {
                instance: &name,
                i: r.resource,
                t: r.arrival,
                n: r.samples,
                mean: r.mean,
                se: r.se,
                target: r.target,
                verdict: r.verdict,
            })?;
        }
        String::from_utf8(w.into_inner()?)?
    };
    eprintln!(
        "{}",
        header(args.beta, args.alpha, &format!("root={} trials={}", args.seed, args.trials))
    );
    write_output(args.out.as_ref(), &text)?;
    eprintln!("{} edges, {failures} failing", reports.len());
    Ok(if failures == 0 { Status::Pass } else { Status::Fail })
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let (i, t) = s.split_once(',').ok_or("expected i,t")?;
    let i = i.trim().parse().map_err(|e| format!("resource: {e}"))?;
    let t = t.trim().parse().map_err(|e| format!("arrival: {e}"))?;
    Ok((i, t))
}

#[derive(Args)]
pub struct ScanArgs {
    instance: PathBuf,
    /// Scan a single edge `i,t` (all edges if omitted).
    #[arg(long, value_parser = parse_edge)]
    edge: Option<(usize, usize)>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_Y2_SAMPLES)]
    y2_samples: usize,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full reports, counterexamples included, as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

pub fn cmd_scan(args: ScanArgs) -> anyhow::Result<Status> {
    let inst = load_instance(&args.instance)?;
    let tradeoff = TradeoffFunction::new(args.beta)?;
    let edges: Vec<(usize, usize)> = match args.edge {
        Some(e) => vec![e],
        None => inst.edges().collect(),
    };
    let options = ScanOptions {
        grid: args.grid,
        y2_samples: args.y2_samples,
        ..ScanOptions::default()
    };
    let reports = edges
        .par_iter()
        .map(|&e| structural_scan(&inst, e, &tradeoff, options, args.seed))
        .collect::<Result<Vec<StructuralScanReport>, _>>()?;

    println!(
        "{}",
        header(args.beta, DEFAULT_ALPHA, &format!("root={} grid={}", args.seed, args.grid))
    );
    let mut violations = 0;
    for r in &reports {
        violations += r.violations.len();
        println!(
            "edge ({}, {}) epoch {} available {}/{} y_c(1) {:.6} conditional mean {:.6} violations {}",
            r.resource,
            r.arrival,
            r.epoch,
            r.points.iter().filter(|p| p.available).count(),
            r.points.len(),
            r.critical_at_one,
            r.conditional_mean,
            r.violations.len()
        );
        for cx in r.violations.iter().take(3) {
            println!("  {} at y1={} y2={}: {}", cx.check, cx.y1, cx.y2, cx.detail);
        }
    }
    println!("{} edges scanned, {violations} violations", reports.len());
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&reports)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if violations == 0 { Status::Pass } else { Status::Fail })
}
