//! Problem instances and their report-style validation.

use serde::{Deserialize, Serialize};

use super::{CostFunction, Prior};

/// Known mean-consumption instance: `m` users with rates `f_i > 0`, cost
/// functions `V_i`, and an availability budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownInstance {
    pub costs: Vec<CostFunction>,
    pub mean_rates: Vec<f64>,
    pub budget: f64,
}

/// Unknown mean-consumption instance: priors on each `f_i` instead of
/// point values. `symmetric` asserts identical costs and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnknownInstance {
    pub costs: Vec<CostFunction>,
    pub priors: Vec<Prior>,
    pub budget: f64,
    pub symmetric: bool,
}

impl KnownInstance {
    pub fn new(costs: Vec<CostFunction>, mean_rates: Vec<f64>, budget: f64) -> Self {
        KnownInstance { costs, mean_rates, budget }
    }

    pub fn user_count(&self) -> usize {
        self.mean_rates.len()
    }

    /// Largest shortfall any user can experience; grid checks run over
    /// `[0, max f_i]`.
    pub fn max_shortfall(&self) -> f64 {
        self.mean_rates.iter().copied().fold(0.0, f64::max)
    }

    /// Report-style validation: the list of violated invariants.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.mean_rates.is_empty() {
            out.push("instance must have at least one user".into());
        }
        if self.costs.len() != self.mean_rates.len() {
            out.push(format!(
                "costs ({}) and mean_rates ({}) must have equal length",
                self.costs.len(),
                self.mean_rates.len()
            ));
        }
        if self.budget <= 0.0 || !self.budget.is_finite() {
            out.push(format!("budget must be positive, got {}", self.budget));
        }
        for (i, &f) in self.mean_rates.iter().enumerate() {
            if f <= 0.0 || !f.is_finite() {
                out.push(format!("mean rate of user {i} must be positive, got {f}"));
            }
        }
        let x_max = self.max_shortfall();
        for (i, cost) in self.costs.iter().enumerate() {
            for v in cost.violations(x_max) {
                out.push(format!("cost of user {i}: {v}"));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}

impl UnknownInstance {
    pub fn new(costs: Vec<CostFunction>, priors: Vec<Prior>, budget: f64, symmetric: bool) -> Self {
        UnknownInstance { costs, priors, budget, symmetric }
    }

    pub fn user_count(&self) -> usize {
        self.priors.len()
    }

    pub fn max_support(&self) -> f64 {
        self.priors.iter().map(|p| p.hi).fold(0.0, f64::max)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.priors.is_empty() {
            out.push("instance must have at least one user".into());
        }
        if self.costs.len() != self.priors.len() {
            out.push(format!(
                "costs ({}) and priors ({}) must have equal length",
                self.costs.len(),
                self.priors.len()
            ));
        }
        if self.budget <= 0.0 || !self.budget.is_finite() {
            out.push(format!("budget must be positive, got {}", self.budget));
        }
        for (i, prior) in self.priors.iter().enumerate() {
            for v in prior.violations() {
                out.push(format!("prior of user {i}: {v}"));
            }
        }
        let x_max = self.max_support();
        for (i, cost) in self.costs.iter().enumerate() {
            for v in cost.violations(x_max) {
                out.push(format!("cost of user {i}: {v}"));
            }
        }
        if self.symmetric && out.is_empty() {
            out.extend(self.symmetry_violations());
        }
        out
    }

    /// Checks only the symmetry invariant: identical priors (same support
    /// and kind) and identical costs as functions on a sampled grid.
    pub fn symmetry_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.priors.is_empty() || self.costs.len() != self.priors.len() {
            return out;
        }
        let x_max = self.max_support();
        let (p0, c0) = (&self.priors[0], &self.costs[0]);
        for (i, p) in self.priors.iter().enumerate().skip(1) {
            if p.lo != p0.lo || p.hi != p0.hi || p.kind != p0.kind {
                out.push(format!("symmetric instance requires identical priors (user {i} differs)"));
            }
        }
        for (i, c) in self.costs.iter().enumerate().skip(1) {
            if !c.approx_same(c0, x_max) {
                out.push(format!("symmetric instance requires identical costs (user {i} differs)"));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}
