//! Property tests tying the greedy solver to the brute-force oracle.

use proptest::prelude::*;

use shortfall_core::domain::{Allocation, CostFunction, KnownInstance};
use shortfall_core::global_oracle::solve_concave_exact;
use shortfall_core::known_solver::{linprog_objective, solve_linprog, true_objective};

fn arb_cost() -> impl Strategy<Value = CostFunction> {
    prop_oneof![
        (0.1f64..3.0).prop_map(CostFunction::linear),
        (0.1f64..3.0).prop_map(CostFunction::sqrt),
        (0.1f64..3.0).prop_map(CostFunction::log1p),
        ((0.1f64..2.0), (0.05f64..1.0)).prop_map(|(s1, drop)| {
            let s2 = s1 * (1.0 - drop);
            CostFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, s1), (3.0, s1 + 2.0 * s2)])
        }),
    ]
}

prop_compose! {
    fn arb_instance(max_m: usize)(
        pairs in prop::collection::vec((arb_cost(), 0.2f64..4.0), 2..=max_m),
        budget_frac in 0.05f64..0.95,
    ) -> KnownInstance {
        let (costs, rates): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let total: f64 = rates.iter().sum();
        KnownInstance::new(costs, rates, budget_frac * total)
    }
}

fn interior_count(instance: &KnownInstance, rates: &[f64]) -> usize {
    rates
        .iter()
        .zip(&instance.mean_rates)
        .filter(|&(&s, &f)| s > 0.0 && s < f)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Corner structure for both solvers, and greedy budget accounting.
    #[test]
    fn greedy_and_oracle_structure(instance in arb_instance(8)) {
        let report = solve_linprog(&instance).unwrap();
        prop_assert!(interior_count(&instance, &report.allocation.rates) <= 1);

        let total: f64 = report.allocation.rates.iter().sum();
        let demand: f64 = instance.mean_rates.iter().sum();
        let all_full = report
            .allocation
            .rates
            .iter()
            .zip(&instance.mean_rates)
            .all(|(&s, &f)| s == f);
        prop_assert!(
            (total - instance.budget.min(demand)).abs() <= 1e-9 || all_full,
            "total {total} vs min(budget, demand) {}",
            instance.budget.min(demand)
        );

        let oracle = solve_concave_exact(&instance).unwrap();
        prop_assert!(interior_count(&instance, &oracle.allocation.rates) <= 1);
    }

    // The greedy result is optimal for the linearized program: no corner of
    // the linearized instance does better.
    #[test]
    fn greedy_is_lp_optimal(instance in arb_instance(8)) {
        let report = solve_linprog(&instance).unwrap();
        let linearized = KnownInstance::new(
            instance
                .costs
                .iter()
                .zip(&instance.mean_rates)
                .map(|(cost, &f)| CostFunction::linear(cost.eval(f).unwrap() / f))
                .collect(),
            instance.mean_rates.clone(),
            instance.budget,
        );
        let corner_best = solve_concave_exact(&linearized).unwrap();
        prop_assert!(
            report.lp_objective <= corner_best.objective + 1e-9,
            "greedy lp {} vs corner oracle {}",
            report.lp_objective,
            corner_best.objective
        );
    }

    // The per-user gap bound with its explicit constant 2 max_i V_i(f_i).
    #[test]
    fn gap_to_global_optimum_is_bounded(instance in arb_instance(8)) {
        let report = solve_linprog(&instance).unwrap();
        let oracle = solve_concave_exact(&instance).unwrap();
        let m = instance.mean_rates.len() as f64;
        let max_v = instance
            .costs
            .iter()
            .zip(&instance.mean_rates)
            .map(|(cost, &f)| cost.eval(f).unwrap())
            .fold(0.0, f64::max);
        prop_assert!(oracle.objective <= report.true_objective + 1e-12);
        prop_assert!(
            report.true_objective - oracle.objective <= 2.0 / m * max_v + 1e-9,
            "gap {} exceeds {}",
            report.true_objective - oracle.objective,
            2.0 / m * max_v
        );
    }

    // Relabeling users relabels the solution (distinct ratios only, so the
    // index tie-break cannot fire).
    #[test]
    fn permutation_equivariance(instance in arb_instance(6), rot in 1usize..5) {
        let m = instance.mean_rates.len();
        let ratios: Vec<f64> = (0..m)
            .map(|i| instance.costs[i].eval(instance.mean_rates[i]).unwrap() / instance.mean_rates[i])
            .collect();
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let distinct = sorted.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-6 * w[1].abs().max(1.0));
        prop_assume!(distinct);

        let rot = rot % m;
        let perm: Vec<usize> = (0..m).map(|i| (i + rot) % m).collect();
        let permuted = KnownInstance::new(
            perm.iter().map(|&p| instance.costs[p].clone()).collect(),
            perm.iter().map(|&p| instance.mean_rates[p]).collect(),
            instance.budget,
        );
        let base = solve_linprog(&instance).unwrap();
        let relabeled = solve_linprog(&permuted).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(relabeled.allocation.rates[i], base.allocation.rates[p]);
        }
    }

    // The linearized objective of a feasible box allocation dominates the
    // greedy optimum (sanity of the objective evaluators).
    #[test]
    fn greedy_beats_plain_feasible_points(
        instance in arb_instance(6),
        shrink in 0.0f64..1.0,
    ) {
        let report = solve_linprog(&instance).unwrap();
        let rates: Vec<f64> = report.allocation.rates.iter().map(|s| s * shrink).collect();
        let candidate = Allocation::new(rates, instance.budget);
        let lp = linprog_objective(&instance, &candidate).unwrap();
        prop_assert!(report.lp_objective <= lp + 1e-9);
        let oracle = solve_concave_exact(&instance).unwrap();
        prop_assert!(oracle.objective <= true_objective(&instance, &candidate).unwrap() + 1e-12);
    }
}
