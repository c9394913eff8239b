//! Core value types shared by all modules: cost functions, priors, problem
//! instances, allocations, and their validity checks.
//!
//! All types are immutable after construction and safe to share across
//! threads. Validation is report-style: `violations()` returns the list of
//! violated invariants rather than failing construction, so malformed
//! scenario files can be diagnosed in full.

mod allocation;
mod cost;
mod instance;
mod prior;

pub use allocation::Allocation;
pub use cost::CostFunction;
pub use instance::{KnownInstance, UnknownInstance};
pub use prior::{Prior, PriorKind, NORMALIZATION_TOL};

/// Absolute tolerance for constraint feasibility (budgets, box constraints).
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Relative tolerance for function-identity checks (sampled-grid equality,
/// curvature sign checks at machine scale).
pub const IDENTITY_RTOL: f64 = 1e-12;
