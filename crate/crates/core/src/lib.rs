//! Simulation and verification toolkit for online bipartite matching with
//! reusable resources.
//!
//! A resource matched at time `a` is busy during `(a, a + d]` and can be
//! rematched afterwards. The crate provides:
//!
//! * [`instance`]: the problem data model, file format and generators.
//! * [`engine`]: exact discrete-event simulation of one online run.
//! * [`policies`]: Greedy, Ranking, Perturbed Greedy, Random, rerank-on-return,
//!   Periodic Reranking and Fluid Reranking.
//! * [`offline`]: the exact offline optimum (small instances) and the LP
//!   relaxation solved by a dense revised simplex.
//! * [`analysis`]: dual fitting from traces, Monte Carlo audits of the dual
//!   constraints, and coupled-seed structural scans.
//! * [`fluid`]: availability probabilities of the single-unit renewal process.
//! * [`bounds`]: evaluation and minimization of the competitive-ratio bound.

pub mod analysis;
pub mod bounds;
pub mod engine;
pub mod fluid;
pub mod instance;
pub mod offline;
pub mod policies;
pub mod stats;

pub use engine::{simulate, MatchingTrace};
pub use instance::{Instance, Tick, UsageModel};
pub use policies::{PolicyKind, SeedVector, TradeoffFunction};

/// Default trade-off parameter of the exponential reduced-price function.
pub const DEFAULT_BETA: f64 = 0.89;

/// Default competitive-ratio target used by audits.
pub const DEFAULT_ALPHA: f64 = 0.589;
