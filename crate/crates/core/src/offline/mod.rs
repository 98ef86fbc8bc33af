//! Offline benchmarks: the exact optimum by search and the LP upper bound.

mod brute;
mod lp;
pub mod simplex;

use std::fmt;

use serde::Serialize;

pub use brute::{brute_force_opt, brute_force_opt_with_cap, search_size, DEFAULT_SEARCH_CAP};
pub use lp::{prune_window_constraints, Constraint, ConstraintKind, LpModel};

use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    Lp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute_force",
            Method::Lp => "lp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solution {
    /// Resource chosen per arrival.
    Matching(Vec<Option<usize>>),
    /// `(resource, arrival, weight)` for edges with positive weight.
    Fractional(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflineResult {
    pub value: f64,
    pub solution: Solution,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OfflineError {
    #[error("too large for exact search: {size:.3e} nodes exceeds cap {cap:.3e}")]
    TooLarge { size: f64, cap: f64 },
    #[error("resource {resource} has stochastic usage; offline benchmarks need deterministic durations")]
    NotDeterministic { resource: usize },
    #[error(transparent)]
    Simplex(#[from] simplex::SimplexError),
}

/// Iteration cap used by [`lp_upper_bound`].
pub fn default_iteration_cap(model: &LpModel) -> usize {
    10_000 + 50 * (model.num_vars() + model.constraints.len())
}

/// Optimal value of the (pruned) LP relaxation.
pub fn lp_upper_bound(instance: &Instance) -> Result<OfflineResult, OfflineError> {
    let model = prune_window_constraints(LpModel::build(instance)?);
    solve_model(&model)
}

pub fn solve_model(model: &LpModel) -> Result<OfflineResult, OfflineError> {
    let problem = simplex::Problem {
        rows: model.constraints.len(),
        columns: {
            let mut cols = vec![Vec::new(); model.num_vars()];
            for (r, c) in model.constraints.iter().enumerate() {
                for &k in &c.vars {
                    cols[k].push((r, 1.0));
                }
            }
            cols
        },
        objective: model.objective.clone(),
        rhs: vec![1.0; model.constraints.len()],
    };
    let sol = simplex::solve(&problem, default_iteration_cap(model))?;
    let weights = sol
        .x
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > simplex::FEASIBILITY_TOL)
        .map(|(k, &w)| (model.edges[k].0, model.edges[k].1, w))
        .collect();
    Ok(OfflineResult {
        value: sol.objective,
        solution: Solution::Fractional(weights),
        method: Method::Lp,
    })
}
