//! Greedy solver for the linearized allocation program with known mean
//! consumption rates.
//!
//! The linearized objective `(1/m) * sum (1 - s_i/f_i) V_i(f_i)` over
//! `{0 <= s_i <= f_i, sum s_i <= budget}` is a weighted fractional
//! knapsack: sort users by `V_i(f_i) / f_i` descending, saturate in order,
//! and give the first user that does not fit the remaining budget. Runs in
//! `O(m log m)` and touches at most one user fractionally, so the true
//! concave objective of the result is within `2 max_i V_i(f_i) / m` of the
//! global optimum.

use serde::Serialize;

use crate::domain::{Allocation, KnownInstance, FEASIBILITY_TOL};
use crate::{Error, Result};

/// Solution report of [`solve_linprog`].
#[derive(Debug, Clone, Serialize)]
pub struct GreedySolveReport {
    pub allocation: Allocation,
    /// Linearized objective `(1/m) * sum (1 - s_i/f_i) V_i(f_i)`.
    pub lp_objective: f64,
    /// Concave objective `(1/m) * sum V_i(max(f_i - s_i, 0))`.
    pub true_objective: f64,
    /// The at-most-one user with `0 < s_i < f_i`.
    pub fractional_user: Option<usize>,
    /// Users in decreasing order of `V_i(f_i) / f_i` (ties: lower index).
    pub sort_order: Vec<usize>,
}

fn check_instance_shape(instance: &KnownInstance) -> Result<()> {
    let m = instance.mean_rates.len();
    if m == 0 || instance.costs.len() != m {
        return Err(Error::Precondition(
            "instance must have at least one user and matching cost/rate lengths".into(),
        ));
    }
    // The instance invariant wants a positive budget, but the objectives and
    // the greedy rule are well-defined at the c = 0 boundary, so only reject
    // negative or non-finite budgets here.
    if instance.budget < 0.0 || !instance.budget.is_finite() {
        return Err(Error::Precondition(format!(
            "budget must be non-negative, got {}",
            instance.budget
        )));
    }
    if instance.mean_rates.iter().any(|&f| f <= 0.0 || !f.is_finite()) {
        return Err(Error::Precondition("all mean rates must be positive".into()));
    }
    Ok(())
}

fn check_allocation(instance: &KnownInstance, alloc: &Allocation) -> Result<()> {
    if alloc.rates.len() != instance.mean_rates.len() {
        return Err(Error::Infeasible(format!(
            "allocation has {} rates for {} users",
            alloc.rates.len(),
            instance.mean_rates.len()
        )));
    }
    if alloc.rates.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(Error::Infeasible("allocation rates must be non-negative".into()));
    }
    let total: f64 = alloc.rates.iter().sum();
    if total > instance.budget + FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "allocation total {total} exceeds budget {}",
            instance.budget
        )));
    }
    Ok(())
}

/// Solve the linearized program by the greedy ratio rule.
pub fn solve_linprog(instance: &KnownInstance) -> Result<GreedySolveReport> {
    check_instance_shape(instance)?;
    let m = instance.mean_rates.len();

    let mut order: Vec<usize> = (0..m).collect();
    let ratios: Vec<f64> = (0..m)
        .map(|i| instance.costs[i].value_at(instance.mean_rates[i]) / instance.mean_rates[i])
        .collect();
    order.sort_by(|&a, &b| {
        ratios[b].partial_cmp(&ratios[a]).unwrap().then(a.cmp(&b))
    });

    let mut rates = vec![0.0; m];
    let mut fractional_user = None;
    let mut remaining = instance.budget;
    for &i in &order {
        if remaining <= 0.0 {
            break;
        }
        let f = instance.mean_rates[i];
        if remaining >= f {
            rates[i] = f;
            remaining -= f;
        } else {
            rates[i] = remaining;
            fractional_user = Some(i);
            remaining = 0.0;
        }
    }

    let allocation = Allocation::new(rates, instance.budget);
    let lp_objective = linprog_objective(instance, &allocation)?;
    let true_objective = true_objective(instance, &allocation)?;
    Ok(GreedySolveReport { allocation, lp_objective, true_objective, fractional_user, sort_order: order })
}

/// The concave objective `(1/m) * sum V_i(max(f_i - s_i, 0))`.
pub fn true_objective(instance: &KnownInstance, alloc: &Allocation) -> Result<f64> {
    check_instance_shape(instance)?;
    check_allocation(instance, alloc)?;
    let m = instance.mean_rates.len() as f64;
    let total: f64 = instance
        .mean_rates
        .iter()
        .zip(&alloc.rates)
        .zip(&instance.costs)
        .map(|((&f, &s), cost)| cost.value_at((f - s).max(0.0)))
        .sum();
    Ok(total / m)
}

/// The linearized objective `(1/m) * sum (1 - s_i/f_i) V_i(f_i)`; requires
/// the box constraint `0 <= s_i <= f_i`.
pub fn linprog_objective(instance: &KnownInstance, alloc: &Allocation) -> Result<f64> {
    check_instance_shape(instance)?;
    check_allocation(instance, alloc)?;
    let m = instance.mean_rates.len() as f64;
    let mut total = 0.0;
    for (i, ((&f, &s), cost)) in instance
        .mean_rates
        .iter()
        .zip(&alloc.rates)
        .zip(&instance.costs)
        .enumerate()
    {
        if s > f {
            return Err(Error::Domain(format!(
                "linearized objective requires s_i <= f_i (user {i}: {s} > {f})"
            )));
        }
        total += (1.0 - s / f) * cost.value_at(f);
    }
    Ok(total / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::CostFunction;

    fn inst(costs: Vec<CostFunction>, rates: Vec<f64>, budget: f64) -> KnownInstance {
        KnownInstance::new(costs, rates, budget)
    }

    // Independent oracle for the two-user examples: enumerate the corner
    // allocations of {0 <= s_i <= f_i, sum <= budget} directly.
    fn two_user_corner_minimum(instance: &KnownInstance) -> f64 {
        let (f0, f1) = (instance.mean_rates[0], instance.mean_rates[1]);
        let c = instance.budget;
        let mut best = f64::INFINITY;
        for (s0, s1) in [
            (0.0, 0.0),
            (f0.min(c), (c - f0.min(c)).min(f1)),
            ((c - f1.min(c)).min(f0), f1.min(c)),
            (f0.min(c), 0.0),
            (0.0, f1.min(c)),
        ] {
            if s0 + s1 <= c + 1e-12 {
                let alloc = Allocation::new(vec![s0, s1], c);
                best = best.min(true_objective(instance, &alloc).unwrap());
            }
        }
        best
    }

    #[test]
    fn greedy_matches_corner_enumeration_linear() {
        // Corners (1,1) and (0,2) cost 0.5 and 1.0.
        let instance = inst(
            vec![CostFunction::linear(2.0), CostFunction::linear(1.0)],
            vec![1.0, 2.0],
            2.0,
        );
        let report = solve_linprog(&instance).unwrap();
        assert_eq!(report.allocation.rates, vec![1.0, 1.0]);
        assert!((report.lp_objective - 0.5).abs() < 1e-12);
        assert!((report.true_objective - 0.5).abs() < 1e-12);
        assert!((two_user_corner_minimum(&instance) - 0.5).abs() < 1e-12);
        assert_eq!(report.fractional_user, Some(1));
    }

    #[test]
    fn surplus_budget_covers_all_demand() {
        let instance = inst(
            vec![CostFunction::linear(1.0); 3],
            vec![2.0, 1.0, 1.0],
            4.0,
        );
        let report = solve_linprog(&instance).unwrap();
        assert_eq!(report.allocation.rates, vec![2.0, 1.0, 1.0]);
        assert_eq!(report.lp_objective, 0.0);
        assert_eq!(report.true_objective, 0.0);
        assert_eq!(report.fractional_user, None);
    }

    #[test]
    fn greedy_prefers_high_ratio_user() {
        // Ratios (0.5, 1.0): user 1 saturates first, user 0 takes the rest.
        let instance = inst(
            vec![CostFunction::sqrt(1.0), CostFunction::linear(1.0)],
            vec![4.0, 2.0],
            4.0,
        );
        let report = solve_linprog(&instance).unwrap();
        assert_eq!(report.allocation.rates, vec![2.0, 2.0]);
        assert_eq!(report.sort_order, vec![1, 0]);
        assert_eq!(report.fractional_user, Some(0));
        let expected = 0.5 * 2.0f64.sqrt();
        assert!((report.true_objective - expected).abs() < 1e-12);
        assert!((two_user_corner_minimum(&instance) - expected).abs() < 1e-12);
    }

    #[test]
    fn true_objective_examples() {
        let instance = inst(vec![CostFunction::linear(1.0)], vec![3.0], 5.0);
        let full = Allocation::new(vec![3.0], 5.0);
        assert_eq!(true_objective(&instance, &full).unwrap(), 0.0);
        let partial = Allocation::new(vec![1.0], 5.0);
        assert_eq!(true_objective(&instance, &partial).unwrap(), 2.0);

        let instance = inst(vec![CostFunction::sqrt(1.0); 2], vec![4.0, 1.0], 6.0);
        let none = Allocation::new(vec![0.0, 0.0], 6.0);
        assert!((true_objective(&instance, &none).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn linprog_objective_examples() {
        let instance = inst(vec![CostFunction::linear(1.0); 2], vec![2.0, 2.0], 4.0);
        let zero = Allocation::new(vec![0.0, 0.0], 4.0);
        assert_eq!(linprog_objective(&instance, &zero).unwrap(), 2.0);
        let full = Allocation::new(vec![2.0, 2.0], 4.0);
        assert_eq!(linprog_objective(&instance, &full).unwrap(), 0.0);
        let half = Allocation::new(vec![1.0, 1.0], 4.0);
        assert_eq!(linprog_objective(&instance, &half).unwrap(), 1.0);
    }

    #[test]
    fn box_constraint_violation_is_domain_error() {
        let instance = inst(vec![CostFunction::linear(1.0)], vec![1.0], 4.0);
        let over = Allocation::new(vec![1.5], 4.0);
        assert!(matches!(
            linprog_objective(&instance, &over),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn infeasible_allocation_is_rejected() {
        let instance = inst(vec![CostFunction::linear(1.0)], vec![1.0], 1.0);
        let over = Allocation::new(vec![1.5], 1.0);
        assert!(matches!(
            true_objective(&instance, &over),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn equal_ratio_tie_breaks_by_index() {
        let instance = inst(
            vec![CostFunction::linear(1.0); 3],
            vec![1.0, 1.0, 1.0],
            1.5,
        );
        let report = solve_linprog(&instance).unwrap();
        assert_eq!(report.sort_order, vec![0, 1, 2]);
        assert_eq!(report.allocation.rates, vec![1.0, 0.5, 0.0]);
        assert_eq!(report.fractional_user, Some(1));
    }
}
