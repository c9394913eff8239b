//! Service-rate allocations.

use serde::{Deserialize, Serialize};

use super::FEASIBILITY_TOL;

/// A non-negative service-rate vector with its budget slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub rates: Vec<f64>,
    /// `budget - sum(rates)` at construction time.
    pub slack: f64,
}

impl Allocation {
    pub fn new(rates: Vec<f64>, budget: f64) -> Self {
        let total: f64 = rates.iter().sum();
        Allocation { rates, slack: budget - total }
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Feasibility report against `budget`: non-negative rates and
    /// `sum <= budget + FEASIBILITY_TOL`.
    pub fn violations(&self, budget: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &s) in self.rates.iter().enumerate() {
            if s < 0.0 || !s.is_finite() {
                out.push(format!("rate of user {i} must be non-negative, got {s}"));
            }
        }
        let total = self.total();
        if total > budget + FEASIBILITY_TOL {
            out.push(format!("total rate {total} exceeds budget {budget}"));
        }
        out
    }

    pub fn is_feasible(&self, budget: f64) -> bool {
        self.violations(budget).is_empty()
    }
}
