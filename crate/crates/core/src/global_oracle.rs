//! Exact brute-force solvers used as ground truth in tests and verification.
//!
//! The concave program's optimum lies at a corner of the polytope
//! `{0 <= s_i <= f_i, sum s_i <= budget}`, where at most one coordinate is
//! strictly interior. [`solve_concave_exact`] enumerates every such corner:
//! for each subset of fully served users it also tries giving one further
//! user the remaining budget. `O(2^m * m)`, so gated behind a size limit.
//!
//! [`solve_expected_grid`] is the companion oracle for expected shortfall
//! costs: exhaustive grid search over per-user rate grids, feasible within
//! the budget. Neither solver is meant to scale; they exist to check the
//! fast ones.

use serde::Serialize;

use crate::domain::{Allocation, KnownInstance, UnknownInstance};
use crate::expected_cost::ExpectedCost;
use crate::known_solver::true_objective;
use crate::{Error, Result};

/// Default user-count limit for corner enumeration (`2^m * m` evaluations).
pub const DEFAULT_CORNER_LIMIT: usize = 15;

/// Default user-count limit for the full grid search.
pub const DEFAULT_GRID_LIMIT: usize = 3;

/// Result of a brute-force solve.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub allocation: Allocation,
    pub objective: f64,
    pub corners_evaluated: u64,
    /// For the grid oracle: recorded Lipschitz bound of `sum_i K_i` over the
    /// grid box (sum of per-user max absolute grid slopes).
    pub grid_lipschitz: Option<f64>,
}

/// Corner-enumeration oracle for the known-consumption program, with the
/// default size limit.
pub fn solve_concave_exact(instance: &KnownInstance) -> Result<OracleResult> {
    solve_concave_exact_with_limit(instance, DEFAULT_CORNER_LIMIT)
}

/// Corner-enumeration oracle with an explicit size limit.
pub fn solve_concave_exact_with_limit(
    instance: &KnownInstance,
    limit: usize,
) -> Result<OracleResult> {
    let m = instance.mean_rates.len();
    if m > limit || m > 62 {
        return Err(Error::TooLarge(format!(
            "corner enumeration limited to {} users, instance has {m}",
            limit.min(62)
        )));
    }
    if m == 0 || instance.budget < 0.0 || !instance.budget.is_finite() {
        return Err(Error::Precondition("valid instance required".into()));
    }

    struct Search<'a> {
        instance: &'a KnownInstance,
        budget: f64,
        corners: u64,
        best_objective: f64,
        best_mask: u64,
        best_extra: Option<(usize, f64)>,
        out_users: Vec<usize>,
    }

    impl Search<'_> {
        fn materialize(&self, mask: u64, extra: Option<(usize, f64)>) -> Vec<f64> {
            let mut rates: Vec<f64> = self
                .instance
                .mean_rates
                .iter()
                .enumerate()
                .map(|(i, &f)| if mask >> i & 1 == 1 { f } else { 0.0 })
                .collect();
            if let Some((j, s)) = extra {
                rates[j] = s;
            }
            rates
        }

        fn offer(&mut self, objective: f64, mask: u64, extra: Option<(usize, f64)>) {
            self.corners += 1;
            if objective < self.best_objective {
                self.best_objective = objective;
                self.best_mask = mask;
                self.best_extra = extra;
            } else if objective == self.best_objective {
                // Tie: keep the lexicographically smallest allocation.
                let cand = self.materialize(mask, extra);
                let best = self.materialize(self.best_mask, self.best_extra);
                if cand < best {
                    self.best_mask = mask;
                    self.best_extra = extra;
                }
            }
        }

        /// `used` = budget consumed by the subset so far, `out_cost` = sum of
        /// V_i(f_i) over users decided to stay at zero.
        fn recurse(&mut self, i: usize, mask: u64, used: f64, out_cost: f64) {
            let m = self.instance.mean_rates.len();
            if i == m {
                // Corner with no interior user.
                self.offer(out_cost, mask, None);
                let resid = self.budget - used;
                if resid > 0.0 {
                    // One extra user takes the residual fractionally. Users
                    // fitting entirely are corners of larger subsets already
                    // enumerated, so only strict 0 < resid < f_j is new.
                    for k in 0..self.out_users.len() {
                        let j = self.out_users[k];
                        let f = self.instance.mean_rates[j];
                        if f > resid {
                            let v_full = self.instance.costs[j].value_at(f);
                            let v_part = self.instance.costs[j].value_at(f - resid);
                            self.offer(out_cost - v_full + v_part, mask, Some((j, resid)));
                        }
                    }
                }
                return;
            }
            let f = self.instance.mean_rates[i];
            // Branch: user i stays at zero.
            self.out_users.push(i);
            let v = self.instance.costs[i].value_at(f);
            self.recurse(i + 1, mask, used, out_cost + v);
            self.out_users.pop();
            // Branch: user i fully served, if it fits.
            if used + f <= self.budget {
                self.recurse(i + 1, mask | 1 << i, used + f, out_cost);
            }
        }
    }

    let mut search = Search {
        instance,
        budget: instance.budget,
        corners: 0,
        best_objective: f64::INFINITY,
        best_mask: 0,
        best_extra: None,
        out_users: Vec::with_capacity(m),
    };
    search.recurse(0, 0, 0.0, 0.0);

    let rates = search.materialize(search.best_mask, search.best_extra);
    let allocation = Allocation::new(rates, instance.budget);
    let objective = true_objective(instance, &allocation)?;
    Ok(OracleResult {
        allocation,
        objective,
        corners_evaluated: search.corners,
        grid_lipschitz: None,
    })
}

/// Exhaustive grid-search oracle for the expected-cost program, with the
/// default size limit.
pub fn solve_expected_grid(instance: &UnknownInstance, grid_step: f64) -> Result<OracleResult> {
    solve_expected_grid_with_limit(instance, grid_step, DEFAULT_GRID_LIMIT)
}

/// Grid-search oracle with an explicit size limit.
pub fn solve_expected_grid_with_limit(
    instance: &UnknownInstance,
    grid_step: f64,
    limit: usize,
) -> Result<OracleResult> {
    let m = instance.priors.len();
    if m > limit {
        return Err(Error::TooLarge(format!(
            "grid search limited to {limit} users, instance has {m}"
        )));
    }
    if m == 0 || instance.budget < 0.0 || !instance.budget.is_finite() || instance.costs.len() != m {
        return Err(Error::Precondition("valid instance required".into()));
    }
    if grid_step <= 0.0 || !grid_step.is_finite() {
        return Err(Error::Domain(format!("grid step must be positive, got {grid_step}")));
    }

    // Per-user grids {0, h, 2h, ..., b_i} and K tables.
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut lipschitz = 0.0;
    for i in 0..m {
        let ec = ExpectedCost::new(instance.costs[i].clone(), instance.priors[i].clone())?;
        let b = instance.priors[i].hi;
        let mut grid = Vec::new();
        let mut k = 0u64;
        loop {
            let x = k as f64 * grid_step;
            if x >= b {
                break;
            }
            grid.push(x);
            k += 1;
        }
        grid.push(b);
        let table: Vec<f64> = grid.iter().map(|&s| ec.eval(s)).collect::<Result<_>>()?;
        let max_slope = grid
            .windows(2)
            .zip(table.windows(2))
            .map(|(xs, ks)| ((ks[1] - ks[0]) / (xs[1] - xs[0])).abs())
            .fold(0.0, f64::max);
        lipschitz += max_slope;
        grids.push(grid);
        tables.push(table);
    }

    let budget_slack = instance.budget + 1e-12 * instance.budget.max(1.0);
    let mut best_sum = f64::INFINITY;
    let mut best_alloc: Vec<f64> = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut evaluated = 0u64;

    // Depth-first over users; the final user is scanned in a tight loop.
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        depth: usize,
        used: f64,
        partial: f64,
        grids: &[Vec<f64>],
        tables: &[Vec<f64>],
        budget_slack: f64,
        scratch: &mut Vec<f64>,
        best_sum: &mut f64,
        best_alloc: &mut Vec<f64>,
        evaluated: &mut u64,
    ) {
        let last = grids.len() - 1;
        if depth == last {
            for (x, k) in grids[last].iter().zip(&tables[last]) {
                if used + x > budget_slack {
                    break;
                }
                *evaluated += 1;
                let total = partial + k;
                if total < *best_sum {
                    *best_sum = total;
                    scratch[last] = *x;
                    best_alloc.copy_from_slice(scratch);
                } else if total == *best_sum {
                    scratch[last] = *x;
                    if scratch[..] < best_alloc[..] {
                        best_alloc.copy_from_slice(scratch);
                    }
                }
            }
            return;
        }
        for (x, k) in grids[depth].iter().zip(&tables[depth]) {
            if used + x > budget_slack {
                break;
            }
            scratch[depth] = *x;
            recurse(
                depth + 1,
                used + x,
                partial + k,
                grids,
                tables,
                budget_slack,
                scratch,
                best_sum,
                best_alloc,
                evaluated,
            );
        }
    }

    recurse(
        0,
        0.0,
        0.0,
        &grids,
        &tables,
        budget_slack,
        &mut scratch,
        &mut best_sum,
        &mut best_alloc,
        &mut evaluated,
    );

    if !best_sum.is_finite() {
        return Err(Error::Infeasible("no feasible grid point".into()));
    }
    let allocation = Allocation::new(best_alloc, instance.budget);
    Ok(OracleResult {
        objective: best_sum / m as f64,
        allocation,
        corners_evaluated: evaluated,
        grid_lipschitz: Some(lipschitz),
    })
}
