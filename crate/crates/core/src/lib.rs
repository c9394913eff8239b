//! Shortfall-cost resource allocation: solvers, oracles, and simulation.
//!
//! A server distributes a time-varying resource among `m` buffered users.
//! Each user accumulates dissatisfaction as a concave, increasing function
//! of its long-term average shortfall. This crate provides:
//!
//! - [`domain`]: cost functions, priors, problem instances, allocations.
//! - [`known_solver`]: the greedy linearized solver for known mean
//!   consumption rates (near-optimal, `O(m log m)`).
//! - [`global_oracle`]: brute-force corner enumeration and grid search used
//!   as ground truth in tests and verification.
//! - [`expected_cost`]: the expected shortfall cost `K(s)` under a prior on
//!   the consumption rate, with closed forms and adaptive quadrature.
//! - [`unknown_solver`]: the exact symmetric-case solver built from a
//!   one-dimensional subproblem per convex-group size.
//! - [`simulator`]: discrete-time buffer dynamics under proportional
//!   policies, with batch-means statistics and stability diagnostics.

pub mod domain;
pub mod expected_cost;
pub mod global_oracle;
pub mod known_solver;
pub mod quad;
pub mod simulator;
pub mod unknown_solver;

pub use domain::{
    Allocation, CostFunction, KnownInstance, Prior, PriorKind, UnknownInstance, FEASIBILITY_TOL,
    IDENTITY_RTOL,
};
pub use expected_cost::{CurvatureReport, ExpectedCost};
pub use global_oracle::{solve_concave_exact, solve_expected_grid, OracleResult};
pub use known_solver::{linprog_objective, solve_linprog, true_objective, GreedySolveReport};
pub use simulator::{AvailabilityProcess, ConsumptionProcess, SimulationResult, StabilityTrace};
pub use unknown_solver::{find_vstar, sym_alloc, SymAllocReport};

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An allocation or policy violates a feasibility constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A brute-force oracle was asked for more than its configured size limit.
    #[error("problem too large: {0}")]
    TooLarge(String),
    /// A stated precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
