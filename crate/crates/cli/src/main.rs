//! `omr`: experiments on online matching with reusable resources.

mod audit;
mod bounds;
mod gen;
mod run;
mod trials;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use omr_core::{Instance, DEFAULT_ALPHA, DEFAULT_BETA};

#[derive(Parser)]
#[command(name = "omr", version, about = "Online matching with reusable resources")]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true, env = "OMR_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(gen::GenArgs),
    /// Simulate one policy on one instance.
    Run(run::RunArgs),
    /// Tabulate policies against an offline baseline.
    Compare(run::CompareArgs),
    /// Monte Carlo audit of the per-edge dual constraint.
    Audit(audit::AuditArgs),
    /// Coupled-seed structural scans of edges.
    Scan(audit::ScanArgs),
    /// Minimize the competitive-ratio bound.
    Bounds(bounds::BoundsArgs),
    /// Availability probabilities of the single-unit renewal process.
    Eta(bounds::EtaArgs),
}

/// How a command that ran to completion ended.
pub enum Status {
    Pass,
    Fail,
}

/// Report header listing the parameters in force.
pub fn header(beta: f64, alpha: f64, extra: &str) -> String {
    let mut h = format!("# beta={beta} alpha={alpha}");
    if beta == DEFAULT_BETA && alpha == DEFAULT_ALPHA {
        h.push_str(" (defaults)");
    }
    if !extra.is_empty() {
        h.push(' ');
        h.push_str(extra);
    }
    h
}

pub fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    // the error already names the path and its cause
    omr_core::instance::load(path).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Writes to `out`, or to stdout when `None`. A closed stdout pipe is not an
/// error.
pub fn write_output(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Gen(a) => gen::cmd_gen(a),
        Command::Run(a) => run::cmd_run(a),
        Command::Compare(a) => run::cmd_compare(a),
        Command::Audit(a) => audit::cmd_audit(a),
        Command::Scan(a) => audit::cmd_scan(a),
        Command::Bounds(a) => bounds::cmd_bounds(a),
        Command::Eta(a) => bounds::cmd_eta(a),
    };
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
