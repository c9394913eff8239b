//! Long-running robustness checks, ignored by default:
//!
//! ```sh
//! cargo test -p shortfall-core --test extended -- --ignored --nocapture
//! ```
//!
//! These sweep wider family combinations and fresh seeds than the standard
//! suites, to confirm the margins are not seed luck.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use shortfall_core::domain::{Allocation, CostFunction, KnownInstance, Prior, UnknownInstance};
use shortfall_core::global_oracle::{solve_concave_exact, solve_expected_grid};
use shortfall_core::known_solver::solve_linprog;
use shortfall_core::simulator::{run, AvailabilityProcess, ConsumptionProcess};
use shortfall_core::unknown_solver::sym_alloc;

fn random_cost(rng: &mut StdRng) -> CostFunction {
    match rng.random_range(0..4) {
        0 => CostFunction::linear(rng.random_range(0.1..3.0)),
        1 => CostFunction::sqrt(rng.random_range(0.1..3.0)),
        2 => CostFunction::log1p(rng.random_range(0.1..3.0)),
        _ => {
            let s1: f64 = rng.random_range(0.2..2.0);
            let s2 = s1 * rng.random_range(0.1..0.9);
            let x1 = rng.random_range(0.3..1.5);
            CostFunction::piecewise_linear(vec![
                (0.0, 0.0),
                (x1, s1 * x1),
                (x1 + 2.0, s1 * x1 + s2 * 2.0),
            ])
        }
    }
}

fn random_prior(rng: &mut StdRng) -> Prior {
    let a: f64 = rng.random_range(0.0..1.2);
    let b = a + rng.random_range(0.4..1.2);
    match rng.random_range(0..3) {
        0 => Prior::uniform(a, b),
        1 => Prior::truncated_exponential(a, b, rng.random_range(0.3..2.0)),
        _ => {
            let bins = rng.random_range(2..5);
            let mut weights: Vec<f64> = (0..bins).map(|_| rng.random_range(0.2..3.0)).collect();
            weights.sort_by(|x, y| y.partial_cmp(x).unwrap());
            Prior::piecewise_constant(a, b, weights)
        }
    }
}

#[test]
#[ignore = "long-running robustness sweep"]
fn greedy_gap_holds_over_two_thousand_instances() {
    let mut rng = StdRng::seed_from_u64(0xACCE_0001);
    let mut worst = 0.0f64;
    for case in 0..2000 {
        let m = rng.random_range(2..=12);
        let costs: Vec<CostFunction> = (0..m).map(|_| random_cost(&mut rng)).collect();
        let rates: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..4.0)).collect();
        let total: f64 = rates.iter().sum();
        let instance = KnownInstance::new(costs, rates, rng.random_range(0.01..0.999) * total);
        let report = solve_linprog(&instance).unwrap();
        let oracle = solve_concave_exact(&instance).unwrap();
        let max_v = instance
            .costs
            .iter()
            .zip(&instance.mean_rates)
            .map(|(c, &f)| c.eval(f).unwrap())
            .fold(0.0, f64::max);
        let gap = report.true_objective - oracle.objective;
        let bound = 2.0 / m as f64 * max_v;
        assert!(gap >= -1e-12 && gap <= bound + 1e-9, "case {case}: gap {gap} vs {bound}");
        if bound > 0.0 {
            worst = worst.max(gap / bound);
        }
    }
    println!("extended gap sweep: worst gap/bound = {worst:.4}");
}

#[test]
#[ignore = "long-running robustness sweep"]
fn symalloc_matches_grid_across_all_families() {
    let mut rng = StdRng::seed_from_u64(0xACCE_0002);
    let step = 0.005;
    let mut worst = 0.0f64;
    for case in 0..300 {
        let m = if case % 2 == 0 { 2 } else { 3 };
        let prior = random_prior(&mut rng);
        let cost = random_cost(&mut rng);
        let budget = rng.random_range(0.0..1.05) * m as f64 * prior.hi;
        let instance = UnknownInstance::new(vec![cost; m], vec![prior; m], budget, true);
        let report = sym_alloc(&instance).unwrap();
        let oracle = solve_expected_grid(&instance, step).unwrap();
        let tol = step * oracle.grid_lipschitz.unwrap() + 1e-6;
        let diff = (report.normalized_objective - oracle.objective).abs();
        assert!(
            diff <= tol,
            "case {case}: |{} - {}| = {diff} > {tol} ({instance:?})",
            report.normalized_objective,
            oracle.objective
        );
        if tol > 0.0 {
            worst = worst.max(diff / tol);
        }
    }
    println!("extended symalloc sweep: worst diff/tol = {worst:.4}");
}

#[test]
#[ignore = "long-running robustness sweep"]
fn shortfall_law_margins_across_seeds() {
    let mut worst = 0.0f64;
    for seed in [1u64, 77, 4096, 90210] {
        for (peak, prob, load) in [(2.0, 0.5, 0.4), (3.0, 0.25, 0.7), (1.5, 0.75, 0.9)] {
            let f = peak * prob;
            let s = f * load;
            let consumption = vec![ConsumptionProcess::scaled_bernoulli(peak, prob, seed)];
            let availability = AvailabilityProcess::constant(s);
            let policy = Allocation::new(vec![s], s);
            let costs = vec![CostFunction::linear(1.0)];
            let result = run(&consumption, &availability, &policy, &costs, 1_000_000, None).unwrap();
            let err = (result.avg_shortfall[0] - (f - s)).abs();
            let tol = 3.0 * result.shortfall_se[0];
            assert!(err <= tol, "seed {seed} peak {peak}: err {err} vs 3se {tol}");
            worst = worst.max(err / tol);
        }
    }
    println!("extended shortfall sweep: worst err/3se = {worst:.4}");
}
