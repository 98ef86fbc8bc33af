//! Dense revised simplex for `max c^T x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The all-slack basis is feasible, so there is no phase one. The basis
//! inverse is kept explicitly and updated by row operations; it is rebuilt
//! by Gauss-Jordan elimination every [`REFACTOR_EVERY`] pivots. Pricing is
//! Dantzig's rule, falling back to Bland's rule after a run of degenerate
//! pivots.

#![allow(clippy::needless_range_loop)]

use std::fmt;

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_STREAK: usize = 50;

/// Column-sparse problem data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub rows: usize,
    /// Column `j` as `(row, coefficient)` pairs.
    pub columns: Vec<Vec<(usize, f64)>>,
    pub objective: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row duals at the final basis.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexError {
    IterationLimit {
        iterations: usize,
        objective: f64,
        rows: usize,
        cols: usize,
        bland: bool,
    },
    Unbounded { column: usize },
    NegativeRhs { row: usize },
    Singular { iterations: usize },
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::IterationLimit {
                iterations,
                objective,
                rows,
                cols,
                bland,
            } => write!(
                f,
                "simplex did not converge after {iterations} iterations \
                 ({rows} rows, {cols} columns, objective {objective}, bland pricing {bland})"
            ),
            SimplexError::Unbounded { column } => write!(f, "lp unbounded along column {column}"),
            SimplexError::NegativeRhs { row } => write!(f, "row {row} has a negative right-hand side"),
            SimplexError::Singular { iterations } => {
                write!(f, "basis became singular after {iterations} iterations")
            }
        }
    }
}

impl std::error::Error for SimplexError {}

struct Tableau<'a> {
    p: &'a Problem,
    m: usize,
    n: usize,
    /// Basic variable per row; `j >= n` is the slack of row `j - n`.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
}

impl<'a> Tableau<'a> {
    fn new(p: &'a Problem) -> Self {
        let m = p.rows;
        let n = p.columns.len();
        let mut binv = vec![vec![0.0; m]; m];
        for (r, row) in binv.iter_mut().enumerate() {
            row[r] = 1.0;
        }
        let mut in_basis = vec![false; n + m];
        for flag in &mut in_basis[n..] {
            *flag = true;
        }
        Tableau {
            p,
            m,
            n,
            basis: (n..n + m).collect(),
            in_basis,
            binv,
            xb: p.rhs.clone(),
        }
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.p.objective[j]
        } else {
            0.0
        }
    }

    fn duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = self.cost(j);
            if c != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[r]) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.p.objective[j] - self.p.columns[j].iter().map(|&(r, a)| y[r] * a).sum::<f64>()
        } else {
            -y[j - self.n]
        }
    }

    /// `B^{-1} A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut u = vec![0.0; self.m];
        if j < self.n {
            for &(row, a) in &self.p.columns[j] {
                for (r, ur) in u.iter_mut().enumerate() {
                    *ur += self.binv[r][row] * a;
                }
            }
        } else {
            for (r, ur) in u.iter_mut().enumerate() {
                *ur = self.binv[r][j - self.n];
            }
        }
        u
    }

    fn pivot(&mut self, r: usize, entering: usize, u: &[f64]) {
        let piv = u[r];
        let pivot_row: Vec<f64> = self.binv[r].iter().map(|v| v / piv).collect();
        let x_r = self.xb[r] / piv;
        for k in 0..self.m {
            if k == r || u[k] == 0.0 {
                continue;
            }
            let f = u[k];
            for (dst, src) in self.binv[k].iter_mut().zip(&pivot_row) {
                *dst -= f * src;
            }
            self.xb[k] -= f * x_r;
            if self.xb[k] < 0.0 && self.xb[k] > -FEASIBILITY_TOL {
                self.xb[k] = 0.0;
            }
        }
        self.binv[r] = pivot_row;
        self.xb[r] = x_r;
        self.in_basis[self.basis[r]] = false;
        self.in_basis[entering] = true;
        self.basis[r] = entering;
    }

    /// Rebuilds `B^{-1}` and `x_B` from scratch.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![vec![0.0; 2 * m]; m];
        for (c, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                for &(row, v) in &self.p.columns[j] {
                    a[row][c] = v;
                }
            } else {
                a[j - self.n][c] = 1.0;
            }
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[m + r] = 1.0;
        }
        for col in 0..m {
            let best = (col..m)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            if a[best][col].abs() < PIVOT_TOL {
                return false;
            }
            a.swap(col, best);
            let piv = a[col][col];
            for v in a[col].iter_mut() {
                *v /= piv;
            }
            let prow = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col && row[col] != 0.0 {
                    let f = row[col];
                    for (dst, src) in row.iter_mut().zip(&prow) {
                        *dst -= f * src;
                    }
                }
            }
        }
        // a = [I | B^{-1}] where column c of B is basis[c]; x_B[c] = (B^{-1} b)[c]
        for r in 0..m {
            self.binv[r].copy_from_slice(&a[r][m..]);
        }
        for r in 0..m {
            let v: f64 = self.binv[r].iter().zip(&self.p.rhs).map(|(x, b)| x * b).sum();
            self.xb[r] = if v < 0.0 && v > -FEASIBILITY_TOL { 0.0 } else { v };
        }
        true
    }
}

pub fn solve(p: &Problem, max_iterations: usize) -> Result<Solution, SimplexError> {
    if let Some(row) = p.rhs.iter().position(|&b| b < 0.0) {
        return Err(SimplexError::NegativeRhs { row });
    }
    let mut t = Tableau::new(p);
    let total = t.n + t.m;
    let mut degenerate = 0usize;
    let mut since_refactor = 0usize;
    for iteration in 0..max_iterations {
        let bland = degenerate >= DEGENERATE_STREAK;
        let y = t.duals();
        let mut entering = None;
        let mut best = OPTIMALITY_TOL;
        for j in 0..total {
            if t.in_basis[j] {
                continue;
            }
            let d = t.reduced_cost(&y, j);
            if d > best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(q) = entering else {
            let mut x = vec![0.0; t.n];
            for (r, &j) in t.basis.iter().enumerate() {
                if j < t.n {
                    x[j] = t.xb[r].max(0.0);
                }
            }
            let objective = x.iter().zip(&p.objective).map(|(x, c)| x * c).sum();
            return Ok(Solution {
                objective,
                x,
                duals: y,
                iterations: iteration,
            });
        };
        let u = t.ftran(q);
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..t.m {
            if u[r] > PIVOT_TOL {
                let ratio = t.xb[r].max(0.0) / u[r];
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - FEASIBILITY_TOL
                            || (ratio <= lratio + FEASIBILITY_TOL && t.basis[r] < t.basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, step)) = leave else {
            return Err(SimplexError::Unbounded { column: q });
        };
        if step <= FEASIBILITY_TOL {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        t.pivot(r, q, &u);
        since_refactor += 1;
        if since_refactor >= REFACTOR_EVERY {
            since_refactor = 0;
            if !t.refactor() {
                return Err(SimplexError::Singular { iterations: iteration });
            }
        }
    }
    let objective = t
        .basis
        .iter()
        .zip(&t.xb)
        .map(|(&j, x)| t.cost(j) * x)
        .sum();
    Err(SimplexError::IterationLimit {
        iterations: max_iterations,
        objective,
        rows: t.m,
        cols: t.n,
        bland: degenerate >= DEGENERATE_STREAK,
    })
}
