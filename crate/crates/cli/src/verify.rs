//! The `verify` subcommand: runs the invariant suite against a scenario and
//! reports one pass/fail row per check.
//!
//! Structural guarantees (gap bounds, corner structure, curvature signs,
//! the shortfall law) hold by construction on any valid scenario, so the
//! suite also covers cross-consistency between sections: consumption means
//! versus instance rates, and policy feasibility against the availability
//! mean. That is where real scenario files actually go wrong.

use serde::Serialize;

use shortfall_core::domain::FEASIBILITY_TOL;
use shortfall_core::expected_cost::ExpectedCost;
use shortfall_core::global_oracle::{
    solve_concave_exact, solve_expected_grid, DEFAULT_CORNER_LIMIT, DEFAULT_GRID_LIMIT,
};
use shortfall_core::known_solver::solve_linprog;
use shortfall_core::simulator;
use shortfall_core::unknown_solver::sym_alloc;
use shortfall_core::{Allocation, CostFunction, KnownInstance};

use crate::scenario::{InstanceKind, Scenario};

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<VerifyRow>,
}

struct Rows(Vec<VerifyRow>);

impl Rows {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(VerifyRow { name: name.to_string(), passed, detail });
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.push(name, true, format!("skipped: {why}"));
    }
}

fn interior_count(rates: &[f64], tops: &[f64]) -> usize {
    rates.iter().zip(tops).filter(|&(&s, &f)| s > 0.0 && s < f).count()
}

/// Run the full verification suite. `grid_step` controls the grid oracle
/// used against SymAlloc.
pub fn run_verify(scenario: &Scenario, seed: u64, grid_step: f64) -> VerifyReport {
    let mut rows = Rows(Vec::new());

    match scenario.instance.kind {
        InstanceKind::Known => verify_known(scenario, &mut rows),
        InstanceKind::Unknown => verify_unknown(scenario, grid_step, &mut rows),
    }
    verify_simulation(scenario, seed, &mut rows);

    let passed = rows.0.iter().all(|r| r.passed);
    VerifyReport { seed, passed, checks: rows.0 }
}

fn verify_known(scenario: &Scenario, rows: &mut Rows) {
    let instance = scenario.known_instance().expect("validated known scenario");
    let m = instance.user_count();

    rows.push(
        "instance-validation",
        instance.violations().is_empty(),
        format!("{m} users, budget {}", instance.budget),
    );

    let report = match solve_linprog(&instance) {
        Ok(r) => r,
        Err(e) => {
            rows.push("lin-alloc", false, format!("solver error: {e}"));
            return;
        }
    };
    rows.push(
        "corner-structure-greedy",
        interior_count(&report.allocation.rates, &instance.mean_rates) <= 1,
        format!("fractional user: {:?}", report.fractional_user),
    );

    let total: f64 = report.allocation.rates.iter().sum();
    let demand: f64 = instance.mean_rates.iter().sum();
    let target = instance.budget.min(demand);
    rows.push(
        "budget-saturation",
        (total - target).abs() <= FEASIBILITY_TOL,
        format!("allocated {total} of min(budget, demand) = {target}"),
    );

    if m > DEFAULT_CORNER_LIMIT {
        rows.skip("greedy-gap-vs-oracle", &format!("m = {m} exceeds oracle limit"));
        return;
    }
    let oracle = match solve_concave_exact(&instance) {
        Ok(o) => o,
        Err(e) => {
            rows.push("greedy-gap-vs-oracle", false, format!("oracle error: {e}"));
            return;
        }
    };
    rows.push(
        "corner-structure-oracle",
        interior_count(&oracle.allocation.rates, &instance.mean_rates) <= 1,
        format!("corners evaluated: {}", oracle.corners_evaluated),
    );

    let max_v = instance
        .costs
        .iter()
        .zip(&instance.mean_rates)
        .map(|(c, &f)| c.eval(f).unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let bound = 2.0 / m as f64 * max_v;
    let gap = report.true_objective - oracle.objective;
    rows.push(
        "greedy-gap-vs-oracle",
        (-1e-12..=bound + 1e-9).contains(&gap),
        format!("gap {gap:.6e} vs bound {bound:.6e}"),
    );

    let linearized = KnownInstance::new(
        instance
            .costs
            .iter()
            .zip(&instance.mean_rates)
            .map(|(c, &f)| CostFunction::linear(c.eval(f).unwrap_or(f64::NAN) / f))
            .collect(),
        instance.mean_rates.clone(),
        instance.budget,
    );
    match solve_concave_exact(&linearized) {
        Ok(corner_best) => rows.push(
            "lp-optimality-vs-linearized-corners",
            report.lp_objective <= corner_best.objective + 1e-9,
            format!("greedy {} vs corner best {}", report.lp_objective, corner_best.objective),
        ),
        Err(e) => rows.push("lp-optimality-vs-linearized-corners", false, format!("{e}")),
    }
}

fn verify_unknown(scenario: &Scenario, grid_step: f64, rows: &mut Rows) {
    let instance = scenario.unknown_instance().expect("validated unknown scenario");
    let m = instance.user_count();

    rows.push(
        "instance-validation",
        instance.violations().is_empty(),
        format!("{m} users, budget {}, symmetric: {}", instance.budget, instance.symmetric),
    );

    match ExpectedCost::new(instance.costs[0].clone(), instance.priors[0].clone())
        .and_then(|ec| ec.check_curvature(101))
    {
        Ok(report) => rows.push(
            "expected-cost-curvature",
            report.all_ok(),
            format!(
                "concave max 2nd diff {:?}, convex min 2nd diff {:.3e}, scale {:.6}",
                report.max_second_difference_concave, report.min_second_difference_convex, report.scale
            ),
        ),
        Err(e) => rows.push("expected-cost-curvature", false, format!("{e}")),
    }

    if !instance.symmetric {
        rows.skip("symalloc-vs-grid-oracle", "asymmetric unknown instances are out of scope");
        return;
    }
    let report = match sym_alloc(&instance) {
        Ok(r) => r,
        Err(e) => {
            rows.push("sym-alloc", false, format!("solver error: {e}"));
            return;
        }
    };

    let a = instance.priors[0].lo;
    let convex: Vec<f64> = report.allocation.rates.iter().copied().filter(|&s| s >= a).collect();
    let equal = convex.windows(2).all(|w| w[0] == w[1]);
    let interior = report.allocation.rates.iter().filter(|&&s| s > 0.0 && s < a).count();
    rows.push(
        "symalloc-structure",
        equal && interior <= 1 && report.allocation.is_feasible(instance.budget),
        format!(
            "n* = {}, beta* = {:.6}, water level used: {}",
            report.n_star, report.beta_star, report.used_water_level
        ),
    );

    if m > DEFAULT_GRID_LIMIT {
        rows.skip("symalloc-vs-grid-oracle", &format!("m = {m} exceeds grid oracle limit"));
    } else {
        match solve_expected_grid(&instance, grid_step) {
            Ok(oracle) => {
                let lipschitz = oracle.grid_lipschitz.unwrap_or(0.0);
                let tol = grid_step * lipschitz + 1e-6;
                let diff = (report.normalized_objective - oracle.objective).abs();
                rows.push(
                    "symalloc-vs-grid-oracle",
                    diff <= tol,
                    format!(
                        "|{} - {}| = {diff:.3e} vs tol {tol:.3e} (step {grid_step}, L {lipschitz:.3})",
                        report.normalized_objective, oracle.objective
                    ),
                );
            }
            Err(e) => rows.push("symalloc-vs-grid-oracle", false, format!("{e}")),
        }
    }

    // More budget never hurts: compare against a solve at 90% budget.
    if instance.budget > 0.0 {
        let mut smaller = instance.clone();
        smaller.budget *= 0.9;
        match sym_alloc(&smaller) {
            Ok(prev) => rows.push(
                "budget-monotonicity",
                report.normalized_objective <= prev.normalized_objective + 1e-9,
                format!(
                    "objective {} at budget {} vs {} at 90%",
                    report.normalized_objective, instance.budget, prev.normalized_objective
                ),
            ),
            Err(e) => rows.push("budget-monotonicity", false, format!("{e}")),
        }
    }
}

/// The policy a scenario simulates: explicit override, or the solver output.
pub fn scenario_policy(scenario: &Scenario) -> Result<(Allocation, &'static str), String> {
    if let Some(sim) = &scenario.simulation {
        if let Some(rates) = &sim.policy_rates {
            return Ok((Allocation::new(rates.clone(), scenario.instance.budget), "scenario"));
        }
    }
    match scenario.instance.kind {
        InstanceKind::Known => {
            let instance = scenario.known_instance().ok_or("missing known instance")?;
            let report = solve_linprog(&instance).map_err(|e| e.to_string())?;
            Ok((report.allocation, "lin_alloc"))
        }
        InstanceKind::Unknown => {
            let instance = scenario.unknown_instance().ok_or("missing unknown instance")?;
            let report = sym_alloc(&instance).map_err(|e| e.to_string())?;
            Ok((report.allocation, "sym_alloc"))
        }
    }
}

fn verify_simulation(scenario: &Scenario, seed: u64, rows: &mut Rows) {
    let Some(sim) = &scenario.simulation else {
        return;
    };
    let Some((availability, consumption)) = scenario.simulation_processes(seed) else {
        return;
    };
    let costs: Vec<CostFunction> = scenario.instance.costs.iter().map(|c| c.to_core()).collect();

    // Cross-consistency: declared instance rates versus process means.
    match scenario.instance.kind {
        InstanceKind::Known => {
            let rates = scenario.instance.mean_rates.clone().unwrap_or_default();
            let mismatches: Vec<String> = consumption
                .iter()
                .zip(&rates)
                .enumerate()
                .filter(|(_, (c, &f))| (c.mean() - f).abs() > FEASIBILITY_TOL)
                .map(|(i, (c, &f))| format!("user {i}: process mean {} vs rate {f}", c.mean()))
                .collect();
            rows.push(
                "consumption-means-match-instance",
                mismatches.is_empty(),
                if mismatches.is_empty() { "all process means equal mean_rates".into() } else { mismatches.join("; ") },
            );
        }
        InstanceKind::Unknown => {
            let priors = scenario.instance.priors.clone().unwrap_or_default();
            let outside: Vec<String> = consumption
                .iter()
                .zip(&priors)
                .enumerate()
                .filter(|(_, (c, p))| {
                    let core = p.to_core();
                    c.mean() < core.lo - FEASIBILITY_TOL || c.mean() > core.hi + FEASIBILITY_TOL
                })
                .map(|(i, (c, _))| format!("user {i}: process mean {} outside prior support", c.mean()))
                .collect();
            rows.push(
                "consumption-means-within-prior-support",
                outside.is_empty(),
                if outside.is_empty() { "all process means inside supports".into() } else { outside.join("; ") },
            );
        }
    }

    let (policy, source) = match scenario_policy(scenario) {
        Ok(p) => p,
        Err(e) => {
            rows.push("policy-feasibility", false, e);
            return;
        }
    };
    let c_bar = availability.mean();
    let total: f64 = policy.rates.iter().sum();
    let feasible = total <= c_bar + FEASIBILITY_TOL;
    rows.push(
        "policy-feasibility",
        feasible,
        format!("policy total {total} vs availability mean {c_bar} (source: {source})"),
    );
    if !feasible {
        return;
    }

    let result = match simulator::run(&consumption, &availability, &policy, &costs, sim.horizon, sim.buffer_cap) {
        Ok(r) => r,
        Err(e) => {
            rows.push("shortfall-law", false, format!("simulation error: {e}"));
            return;
        }
    };

    rows.push(
        "per-slot-feasibility",
        result.slot_feasibility_violations == 0,
        format!("{} violations over {} slots", result.slot_feasibility_violations, sim.horizon),
    );

    if result.shortfall_se.is_empty() {
        rows.skip("shortfall-law", "horizon too short for batch means");
    } else if sim.buffer_cap.is_none() {
        let mut worst = String::new();
        let mut ok = true;
        for (i, process) in consumption.iter().enumerate() {
            let expected = (process.mean() - policy.rates[i]).max(0.0);
            let err = (result.avg_shortfall[i] - expected).abs();
            let tol = 3.0 * result.shortfall_se[i] + 1e-9;
            if err > tol {
                ok = false;
                worst = format!("user {i}: |{} - {expected}| > {tol:.3e}", result.avg_shortfall[i]);
                break;
            }
        }
        rows.push(
            "shortfall-law",
            ok,
            if ok { "all users within 3 batch-means standard errors".into() } else { worst },
        );
    } else {
        // Finite buffers only guarantee the lower bound.
        let ok = (0..consumption.len()).all(|i| {
            let floor = (consumption[i].mean() - policy.rates[i]).max(0.0);
            result.avg_shortfall[i] >= floor - 3.0 * result.shortfall_se[i] - 1e-9
        });
        rows.push(
            "finite-buffer-shortfall-floor",
            ok,
            "average shortfall >= (f - s)^+ within 3 standard errors".into(),
        );
    }

    if sim.horizon >= 100_000 && sim.buffer_cap.is_none() {
        let stable = (0..consumption.len())
            .filter(|&i| policy.rates[i] < consumption[i].mean())
            .all(|i| result.queue_over_horizon[i] <= 0.01);
        rows.push(
            "stability-queue-decay",
            stable,
            "Q(T)/T <= 0.01 for every undersupplied user".into(),
        );
    } else {
        rows.skip("stability-queue-decay", "needs an uncapped horizon of at least 1e5 slots");
    }

    let rerun = simulator::run(&consumption, &availability, &policy, &costs, sim.horizon, sim.buffer_cap);
    rows.push(
        "determinism-rerun",
        rerun.as_ref() == Ok(&result),
        "identical seed reproduces the result bit-for-bit".into(),
    );
}
