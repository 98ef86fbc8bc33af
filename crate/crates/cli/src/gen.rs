use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};

use omr_core::instance::{gen_example1, gen_kvv_window, gen_random, to_json, RandomParams};
use omr_core::Instance;

use crate::{write_output, Status};

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// Two resources, four arrivals: close pair, long gap, close pair.
    Example1 {
        #[arg(long, default_value_t = 10)]
        d: u64,
        /// Gap within each close pair (must be below d).
        #[arg(long, default_value_t = 3)]
        gap_small: u64,
        /// Gap between the pairs (must exceed d).
        #[arg(long, default_value_t = 20)]
        gap_large: u64,
    },
    /// Upper-triangular hard instance repeated in blocks, each inside one window.
    Kvv {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long)]
        d: u64,
        /// Relabel resources with a random permutation.
        #[arg(long)]
        permutation_seed: Option<u64>,
    },
    /// Random times on [0, horizon] and independent edges.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        resources: usize,
        #[arg(long, default_value_t = 20)]
        arrivals: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        #[arg(long, default_value_t = 50)]
        horizon: u64,
        #[arg(long, default_value_t = 10)]
        d: u64,
        #[arg(long, default_value_t = 1.0)]
        reward_min: f64,
        #[arg(long, default_value_t = 1.0)]
        reward_max: f64,
    },
}

fn build(family: Family) -> anyhow::Result<Instance> {
    let inst = match family {
        Family::Example1 { d, gap_small, gap_large } => gen_example1(d, gap_small, gap_large)?,
        Family::Kvv {
            n,
            blocks,
            d,
            permutation_seed,
        } => gen_kvv_window(n, blocks, d, permutation_seed)?,
        Family::Random {
            seed,
            resources,
            arrivals,
            edge_prob,
            horizon,
            d,
            reward_min,
            reward_max,
        } => gen_random(&RandomParams {
            n_resources: resources,
            n_arrivals: arrivals,
            edge_prob,
            horizon,
            d,
            reward_range: (reward_min, reward_max),
            seed,
        })?,
    };
    Ok(inst)
}

pub fn cmd_gen(args: GenArgs) -> anyhow::Result<Status> {
    let inst = build(args.family)?;
    let json = to_json(&inst);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!(
                "wrote {}: {} resources, {} arrivals, {} edges",
                path.display(),
                inst.num_resources(),
                inst.num_arrivals(),
                inst.num_edges()
            );
        }
        None => write_output(None, &json)?,
    }
    Ok(Status::Pass)
}
