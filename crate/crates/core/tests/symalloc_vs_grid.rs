//! SymAlloc against the exhaustive grid oracle across budget regimes.

use shortfall_core::domain::{CostFunction, Prior, UnknownInstance};
use shortfall_core::global_oracle::solve_expected_grid;
use shortfall_core::unknown_solver::sym_alloc;

fn check_agreement(instance: &UnknownInstance, step: f64) {
    let report = sym_alloc(instance).unwrap();
    let oracle = solve_expected_grid(instance, step).unwrap();
    let lipschitz = oracle.grid_lipschitz.unwrap();
    let tol = step * lipschitz + 1e-6;
    let diff = (report.normalized_objective - oracle.objective).abs();
    assert!(
        diff <= tol,
        "budget {}: symalloc {} vs grid {} (tol {tol})",
        instance.budget,
        report.normalized_objective,
        oracle.objective
    );
    // The oracle explores a subset of the feasible set, so it cannot beat
    // an exact solver by more than its own resolution.
    assert!(report.normalized_objective <= oracle.objective + 1e-9);
}

#[test]
fn uniform_linear_budget_sweep() {
    // Budgets cross every regime: concave-only, box-covered, the
    // water-level window (m a, a + (m-1) b], and full saturation.
    for m in [2usize, 3] {
        for budget in [0.0, 0.4, 1.0, 1.6, 2.0, 2.4, 3.0, 3.6, 4.0, 5.0] {
            let instance = UnknownInstance::new(
                vec![CostFunction::linear(1.0); m],
                vec![Prior::uniform(1.0, 2.0); m],
                budget,
                true,
            );
            check_agreement(&instance, 0.01);
        }
    }
}

#[test]
fn truncated_exponential_sqrt_budget_sweep() {
    for budget in [0.3, 0.9, 1.5, 2.2, 3.1, 4.2] {
        let instance = UnknownInstance::new(
            vec![CostFunction::sqrt(1.2); 2],
            vec![Prior::truncated_exponential(0.8, 2.2, 1.1); 2],
            budget,
            true,
        );
        check_agreement(&instance, 0.01);
    }
}

#[test]
fn piecewise_prior_log_cost() {
    for budget in [0.5, 1.2, 2.0, 2.8] {
        let instance = UnknownInstance::new(
            vec![CostFunction::log1p(1.0); 2],
            vec![Prior::piecewise_constant(0.6, 1.8, vec![2.0, 1.0, 1.0]); 2],
            budget,
            true,
        );
        check_agreement(&instance, 0.01);
    }
}

#[test]
fn support_starting_at_zero() {
    // a = 0: no concave segment; only n with beta = 0 plus the water level.
    for budget in [0.2, 0.7, 1.3, 2.0] {
        let instance = UnknownInstance::new(
            vec![CostFunction::sqrt(1.0); 2],
            vec![Prior::uniform(0.0, 1.0); 2],
            budget,
            true,
        );
        check_agreement(&instance, 0.005);
    }
}
