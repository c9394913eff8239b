//! Exact solver for the symmetric unknown-consumption program.
//!
//! With identical costs and priors, an optimal allocation has a known
//! shape: `n` users share rates in the convex region `[a, b]` equally, at
//! most one user sits at `beta` in the concave region `[0, a)`, and the
//! rest receive nothing. For each group size `n <= m - 1` the best `beta`
//! solves a one-dimensional problem over the box
//! `max(0, c - n b) <= beta <= min(a, c - n a)`.
//!
//! The `n`-enumeration alone is not complete: once `c >= m a`, the
//! configuration with *all* `m` users in the convex region (no
//! concave-segment user at all) becomes feasible, and by convexity its best
//! form is the equal water level `s_i = min(b, c/m)`. No box contains it,
//! and for `c` in `(m a, a + (m-1) b]` it can strictly beat every box
//! candidate (uniform priors on `[1, 2]`, unit linear costs, `m = 2`, `c = 3`:
//! water level costs 0.125 versus 0.25 from the best box). The solver
//! therefore always evaluates the water-level candidate alongside the
//! enumeration whenever `c >= m a`; reports say which side won. Past
//! `c > a + (m-1) b` every box is empty and the water level is the only
//! candidate left.

use serde::Serialize;

use crate::domain::{Allocation, UnknownInstance};
use crate::expected_cost::ExpectedCost;
use crate::{Error, Result};

/// Grid points of the dense scan over the `beta` box.
const BETA_GRID: usize = 1001;

/// Width tolerance of the local refinement around the best grid point.
const BETA_TOL: f64 = 1e-9;

/// One row of the per-`n` enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct NEntry {
    pub n: usize,
    pub feasible: bool,
    pub value: Option<f64>,
    pub beta: Option<f64>,
}

/// Solution report of [`sym_alloc`].
#[derive(Debug, Clone, Serialize)]
pub struct SymAllocReport {
    pub allocation: Allocation,
    /// Size of the equal-rate convex group.
    pub n_star: usize,
    /// Rate of the single concave-segment user.
    pub beta_star: f64,
    /// Total (unnormalized) cost `K(beta) + n K((c-beta)/n) + (m-n-1) K(0)`.
    pub v_star: f64,
    /// `v_star / m`.
    pub normalized_objective: f64,
    pub per_n_table: Vec<NEntry>,
    /// Total cost of the all-users-equal water-level candidate
    /// `s_i = min(b, c/m)`, evaluated whenever `c >= m a`.
    pub water_level_value: Option<f64>,
    /// True when the water-level candidate beat every `beta`-box candidate
    /// (always the case once every box is empty).
    pub used_water_level: bool,
    /// Max absolute slope of the `beta` objective seen on the dense grids;
    /// bounds how much the grid scan can miss.
    pub beta_grid_lipschitz: f64,
}

/// Minimize a univariate function over `[lo, hi]` by a dense grid followed
/// by golden-section refinement around the best grid point. Returns
/// `(value, argmin, max_grid_slope)`.
fn minimize_on_interval<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> (f64, f64, f64) {
    if hi <= lo {
        return (g(lo), lo, 0.0);
    }
    let h = (hi - lo) / (BETA_GRID - 1) as f64;
    let mut best_v = f64::INFINITY;
    let mut best_j = 0;
    let mut prev = 0.0;
    let mut max_slope = 0.0f64;
    for j in 0..BETA_GRID {
        let x = if j == BETA_GRID - 1 { hi } else { lo + j as f64 * h };
        let v = g(x);
        if j > 0 {
            max_slope = max_slope.max(((v - prev) / h).abs());
        }
        prev = v;
        if v < best_v {
            best_v = v;
            best_j = j;
        }
    }

    // Golden-section on the bracket around the best grid point.
    let mut left = lo + best_j.saturating_sub(1) as f64 * h;
    let mut right = (lo + (best_j + 1) as f64 * h).min(hi);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = right - inv_phi * (right - left);
    let mut x2 = left + inv_phi * (right - left);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while right - left > BETA_TOL {
        if f1 <= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = g(x1);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = g(x2);
        }
    }
    let mid = 0.5 * (left + right);
    let fm = g(mid);
    let (mut v, mut x) = (best_v, if best_j == BETA_GRID - 1 { hi } else { lo + best_j as f64 * h });
    for (cand_v, cand_x) in [(fm, mid), (f1, x1), (f2, x2)] {
        if cand_v < v {
            v = cand_v;
            x = cand_x;
        }
    }
    (v, x, max_slope)
}

/// The `beta` box for convex-group size `n`: empty boxes are infeasible.
fn beta_box(n: usize, budget: f64, a: f64, b: f64) -> Option<(f64, f64)> {
    let n_f = n as f64;
    let lo = (budget - n_f * b).max(0.0);
    let hi = (budget - n_f * a).min(a);
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

/// Solve the one-dimensional subproblem for convex-group size `n`.
///
/// Returns `Ok(None)` when the `beta` box is empty (value treated as
/// infinite by the caller), otherwise the minimal value of
/// `K(beta) + n K((c-beta)/n) + (m-n-1) K(0)` and its minimizer.
pub fn find_vstar(
    n: usize,
    m: usize,
    budget: f64,
    k: &ExpectedCost,
) -> Result<Option<(f64, f64)>> {
    let (value, beta, _) = find_vstar_impl(n, m, budget, k)?;
    Ok(value.map(|v| (v, beta.unwrap())))
}

fn find_vstar_impl(
    n: usize,
    m: usize,
    budget: f64,
    k: &ExpectedCost,
) -> Result<(Option<f64>, Option<f64>, f64)> {
    if m == 0 || n > m - 1 {
        return Err(Error::Domain(format!(
            "convex-group size must satisfy 0 <= n <= m - 1, got n = {n}, m = {m}"
        )));
    }
    let (a, b) = k.support();
    let Some((lo, hi)) = beta_box(n, budget, a, b) else {
        return Ok((None, None, 0.0));
    };
    let k0 = k.eval(0.0)?;
    let tail = (m - n - 1) as f64 * k0;
    let n_f = n as f64;
    let g = |beta: f64| {
        let mut v = k.eval(beta.clamp(0.0, b)).expect("beta within [0, b]");
        if n > 0 {
            let r = ((budget - beta) / n_f).clamp(0.0, b);
            v += n_f * k.eval(r).expect("group rate within [0, b]");
        }
        v + tail
    };
    let (value, beta, slope) = minimize_on_interval(g, lo, hi);
    Ok((Some(value), Some(beta), slope))
}

/// Solve the symmetric unknown-consumption program exactly.
pub fn sym_alloc(instance: &UnknownInstance) -> Result<SymAllocReport> {
    if !instance.symmetric {
        return Err(Error::Precondition(
            "sym_alloc requires a symmetric instance (identical costs and priors)".into(),
        ));
    }
    let m = instance.priors.len();
    if m == 0 || instance.costs.len() != m {
        return Err(Error::Precondition(
            "instance must have at least one user and matching cost/prior lengths".into(),
        ));
    }
    // The instance invariant wants a positive budget; the solver itself is
    // well-defined at the c = 0 boundary.
    if instance.budget < 0.0 || !instance.budget.is_finite() {
        return Err(Error::Precondition(format!(
            "budget must be non-negative, got {}",
            instance.budget
        )));
    }
    let violations = instance.symmetry_violations();
    if !violations.is_empty() {
        return Err(Error::Precondition(format!(
            "invalid instance: {}",
            violations.join("; ")
        )));
    }
    let budget = instance.budget;
    // ExpectedCost::new validates the (cost, prior) pair; symmetry extends
    // that to every user.
    let k = ExpectedCost::new(instance.costs[0].clone(), instance.priors[0].clone())?;
    let (a, b) = k.support();

    let mut per_n_table = Vec::with_capacity(m);
    let mut best: Option<(f64, f64, usize)> = None;
    let mut max_slope = 0.0f64;
    for n in 0..m {
        let (value, beta, slope) = find_vstar_impl(n, m, budget, &k)?;
        max_slope = max_slope.max(slope);
        per_n_table.push(NEntry { n, feasible: value.is_some(), value, beta });
        if let (Some(v), Some(bet)) = (value, beta) {
            // Strict improvement only: ties keep the smaller n.
            if best.is_none_or(|(bv, _, _)| v < bv) {
                best = Some((v, bet, n));
            }
        }
    }

    // All-convex water-level candidate, feasible once c >= m a.
    let water_level_value = if budget >= m as f64 * a {
        let level = (budget / m as f64).min(b);
        Some(m as f64 * k.eval(level)?)
    } else {
        None
    };
    let water_wins = match (water_level_value, best) {
        (Some(w), Some((bv, _, _))) => w < bv,
        (Some(_), None) => true,
        _ => false,
    };

    if water_wins {
        let level = (budget / m as f64).min(b);
        let v_star = water_level_value.unwrap();
        let allocation = Allocation::new(vec![level; m], budget);
        return Ok(SymAllocReport {
            allocation,
            n_star: m - 1,
            beta_star: level,
            v_star,
            normalized_objective: v_star / m as f64,
            per_n_table,
            water_level_value,
            used_water_level: true,
            beta_grid_lipschitz: max_slope,
        });
    }

    let (v_star, beta_star, n_star) = best.expect("budget below m*a always has a feasible box");
    let mut rates = vec![0.0; m];
    rates[0] = beta_star;
    if n_star > 0 {
        let r = ((budget - beta_star) / n_star as f64).clamp(0.0, b);
        for rate in rates.iter_mut().take(n_star + 1).skip(1) {
            *rate = r;
        }
    }
    let allocation = Allocation::new(rates, budget);
    Ok(SymAllocReport {
        allocation,
        n_star,
        beta_star,
        v_star,
        normalized_objective: v_star / m as f64,
        per_n_table,
        water_level_value,
        used_water_level: false,
        beta_grid_lipschitz: max_slope,
    })
}
