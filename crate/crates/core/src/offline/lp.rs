//! The LP relaxation of offline matching with deterministic reusable
//! resources.

use std::fmt::Write as _;

use super::OfflineError;
use crate::instance::{Instance, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Resource `resource` is used at most once within the `d`-window
    /// ending at arrival `arrival`.
    Window { resource: usize, arrival: usize },
    /// Arrival `arrival` is matched at most once.
    Demand { arrival: usize },
}

/// `sum of x[vars] <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    /// Variable indices in increasing order.
    pub vars: Vec<usize>,
}

/// `max sum r_i x_it` over edge variables in `[0, 1]`, subject to window and
/// demand constraints with unit coefficients and unit right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    /// Variable `k` is the edge `(resource, arrival)`.
    pub edges: Vec<(usize, usize)>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn build(instance: &Instance) -> Result<LpModel, OfflineError> {
        let d = per_resource_d(instance)?;
        let edges: Vec<(usize, usize)> = instance.edges().collect();
        let objective = edges.iter().map(|&(i, _)| instance.reward(i)).collect();
        let mut var_of = vec![Vec::new(); instance.num_resources()];
        let mut demand: Vec<Vec<usize>> = vec![Vec::new(); instance.num_arrivals()];
        for (k, &(i, t)) in edges.iter().enumerate() {
            var_of[i].push(k);
            demand[t].push(k);
        }
        let mut constraints = Vec::new();
        for i in 0..instance.num_resources() {
            let adj = instance.adjacent_arrivals(i);
            let mut lo = 0;
            for (j, &t) in adj.iter().enumerate() {
                let now = instance.time(t);
                while now - instance.time(adj[lo]) > d[i] {
                    lo += 1;
                }
                constraints.push(Constraint {
                    kind: ConstraintKind::Window {
                        resource: i,
                        arrival: t,
                    },
                    vars: var_of[i][lo..=j].to_vec(),
                });
            }
        }
        for (t, vars) in demand.into_iter().enumerate() {
            if !vars.is_empty() {
                constraints.push(Constraint {
                    kind: ConstraintKind::Demand { arrival: t },
                    vars,
                });
            }
        }
        Ok(LpModel {
            edges,
            objective,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.edges.len()
    }

    pub fn num_window_constraints(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| matches!(c.kind, ConstraintKind::Window { .. }))
            .count()
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = x.iter().map(|&v| (-v).max(v - 1.0)).fold(0.0, f64::max);
        let rows = self
            .constraints
            .iter()
            .map(|c| c.vars.iter().map(|&k| x[k]).sum::<f64>() - 1.0)
            .fold(0.0, f64::max);
        bounds.max(rows)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.objective).map(|(x, c)| x * c).sum()
    }

    /// The model in CPLEX LP text format.
    ///
    /// Variables are named `x_<resource>_<arrival>`, window rows
    /// `w_<resource>_<arrival>` and demand rows `dem_<arrival>`. Sections
    /// appear in the order objective, constraints, bounds; coefficients are
    /// printed with 12 decimals.
    pub fn to_lp_text(&self) -> String {
        let name = |k: usize| format!("x_{}_{}", self.edges[k].0, self.edges[k].1);
        let mut out = String::from("\\ offline LP relaxation\nMaximize\n obj:");
        let terms: Vec<String> = (0..self.num_vars())
            .map(|k| format!("{:.12} {}", self.objective[k], name(k)))
            .collect();
        write_terms(&mut out, &terms);
        out.push_str("Subject To\n");
        for c in &self.constraints {
            match c.kind {
                ConstraintKind::Window { resource, arrival } => {
                    let _ = write!(out, " w_{resource}_{arrival}:");
                }
                ConstraintKind::Demand { arrival } => {
                    let _ = write!(out, " dem_{arrival}:");
                }
            }
            let terms: Vec<String> = c.vars.iter().map(|&k| format!("1.000000000000 {}", name(k))).collect();
            write_terms(&mut out, &terms);
            out.push_str("   <= 1.000000000000\n");
        }
        out.push_str("Bounds\n");
        for k in 0..self.num_vars() {
            let _ = writeln!(out, " 0.000000000000 <= {} <= 1.000000000000", name(k));
        }
        out.push_str("End\n");
        out
    }
}

fn write_terms(out: &mut String, terms: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 x_none\n");
        return;
    }
    for (n, term) in terms.iter().enumerate() {
        if n > 0 && n % 6 == 0 {
            out.push_str("\n   ");
        }
        out.push_str(if n == 0 { " " } else { " + " });
        out.push_str(term);
    }
    out.push('\n');
}

/// Drops window constraints whose variable set is contained in another
/// window of the same resource.
///
/// A resource's windows are contiguous runs of its adjacent arrivals whose
/// starts and ends are both nondecreasing, so window `j` is dominated by
/// window `j + 1` exactly when they start at the same variable.
pub fn prune_window_constraints(model: LpModel) -> LpModel {
    let LpModel {
        edges,
        objective,
        constraints,
    } = model;
    let mut kept = Vec::with_capacity(constraints.len());
    let mut windows: Vec<Constraint> = Vec::new();
    let flush = |windows: &mut Vec<Constraint>, kept: &mut Vec<Constraint>| {
        for j in 0..windows.len() {
            let dominated = windows
                .get(j + 1)
                .is_some_and(|next| next.vars.first() == windows[j].vars.first());
            if !dominated {
                kept.push(windows[j].clone());
            }
        }
        windows.clear();
    };
    let mut current = None;
    for c in constraints {
        match c.kind {
            ConstraintKind::Window { resource, .. } => {
                if current != Some(resource) {
                    flush(&mut windows, &mut kept);
                    current = Some(resource);
                }
                windows.push(c);
            }
            ConstraintKind::Demand { .. } => {
                flush(&mut windows, &mut kept);
                current = None;
                kept.push(c);
            }
        }
    }
    flush(&mut windows, &mut kept);
    LpModel {
        edges,
        objective,
        constraints: kept,
    }
}

pub(crate) fn per_resource_d(instance: &Instance) -> Result<Vec<Tick>, OfflineError> {
    (0..instance.num_resources())
        .map(|i| {
            instance
                .usage(i)
                .deterministic()
                .ok_or(OfflineError::NotDeterministic { resource: i })
        })
        .collect()
}
