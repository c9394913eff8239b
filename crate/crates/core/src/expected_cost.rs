//! Expected shortfall cost `K(s) = E_{f~p}[ V((f - s)^+) ]`.
//!
//! For `s` in `[0, b]` this reduces to the integral of `V(f - s) p(f)` over
//! `[max(s, a), b]`. Uniform priors paired with linear or piecewise-linear
//! costs are evaluated in closed form through the cost antiderivative;
//! everything else goes through adaptive quadrature split at the known
//! kinks of the integrand.
//!
//! `K` is non-increasing with `K(b) = 0`, and for non-increasing priors it
//! is concave on `[0, a]` and convex on `[a, b]`; [`ExpectedCost::check_curvature`]
//! verifies those signs with finite second differences.

use serde::Serialize;

use crate::domain::{CostFunction, Prior, PriorKind, FEASIBILITY_TOL};
use crate::{quad, Error, Result};

/// Absolute tolerance of the adaptive quadrature behind `eval`.
pub const QUAD_TOL: f64 = 1e-9;

/// An evaluator of the expected shortfall cost for one (cost, prior) pair.
#[derive(Debug, Clone)]
pub struct ExpectedCost {
    cost: CostFunction,
    prior: Prior,
    a: f64,
    b: f64,
}

/// Outcome of the finite-difference curvature check.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    /// False when `a = 0` and the concave segment is empty.
    pub concave_segment_checked: bool,
    /// Max second difference on the interior of `(0, a)`; concavity needs
    /// this `<= 1e-6 * scale`.
    pub max_second_difference_concave: Option<f64>,
    /// Min second difference on the interior of `(a, b)`; convexity needs
    /// this `>= -1e-6 * scale`.
    pub min_second_difference_convex: f64,
    /// `K(0)`, the magnitude the sign tolerances are relative to.
    pub scale: f64,
    pub concave_ok: bool,
    pub convex_ok: bool,
    pub monotone_nonincreasing: bool,
}

impl CurvatureReport {
    pub fn all_ok(&self) -> bool {
        self.concave_ok && self.convex_ok && self.monotone_nonincreasing
    }
}

impl ExpectedCost {
    pub fn new(cost: CostFunction, prior: Prior) -> Result<Self> {
        let mut violations = prior.violations();
        violations.extend(cost.violations(prior.hi));
        if !violations.is_empty() {
            return Err(Error::Domain(format!(
                "invalid (cost, prior) pair: {}",
                violations.join("; ")
            )));
        }
        let (a, b) = (prior.lo, prior.hi);
        Ok(ExpectedCost { cost, prior, a, b })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn cost(&self) -> &CostFunction {
        &self.cost
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    fn check_domain(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < -FEASIBILITY_TOL || s > self.b + FEASIBILITY_TOL {
            return Err(Error::Domain(format!(
                "expected cost is defined on [0, {}], got s = {s}",
                self.b
            )));
        }
        Ok(s.clamp(0.0, self.b))
    }

    /// Evaluate `K(s)` for `s` in `[0, b]`: closed form where available,
    /// adaptive quadrature otherwise.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let s = self.check_domain(s)?;
        if let Some(v) = self.closed_form(s) {
            return Ok(v.max(0.0));
        }
        Ok(self.quadrature(s))
    }

    /// The quadrature route regardless of closed-form availability; kept
    /// public so the two routes can be checked against each other.
    pub fn eval_quadrature(&self, s: f64) -> Result<f64> {
        let s = self.check_domain(s)?;
        Ok(self.quadrature(s))
    }

    fn closed_form(&self, s: f64) -> Option<f64> {
        if self.prior.kind != PriorKind::Uniform {
            return None;
        }
        // K(s) = (W(b - s) - W(max(s, a) - s)) / (b - a) with W' = V.
        let upper = self.cost.antiderivative(self.b - s)?;
        let lower = self.cost.antiderivative((self.a - s).max(0.0))?;
        Some((upper - lower) / (self.b - self.a))
    }

    fn quadrature(&self, s: f64) -> f64 {
        let lo = s.max(self.a);
        if lo >= self.b {
            return 0.0;
        }
        let mut breaks = self.prior.kinks();
        breaks.extend(self.cost.kinks().iter().map(|&x| s + x));
        let v =
            quad::integrate_with_breaks(
                |f| self.cost.value_at((f - s).max(0.0)) * self.prior.density(f),
                lo,
                self.b,
                &breaks,
                QUAD_TOL,
            );
        v.max(0.0)
    }

    /// Finite-difference curvature check on `grid_points`-point grids laid
    /// strictly inside `(0, a)` and `(a, b)` with a half-step offset so
    /// breakpoints of the piecewise families are avoided.
    pub fn check_curvature(&self, grid_points: usize) -> Result<CurvatureReport> {
        if grid_points < 5 {
            return Err(Error::Domain(format!(
                "curvature check needs at least 5 grid points, got {grid_points}"
            )));
        }
        let scale = self.eval(0.0)?;
        let tol = 1e-6 * scale + 1e-12;

        let second_diffs = |lo: f64, hi: f64| -> Result<Vec<f64>> {
            let h = (hi - lo) / grid_points as f64;
            let vals: Vec<f64> = (0..grid_points)
                .map(|j| self.eval(lo + (j as f64 + 0.5) * h))
                .collect::<Result<_>>()?;
            Ok(vals.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect())
        };

        let (concave_checked, max_concave) = if self.a > 0.0 {
            let diffs = second_diffs(0.0, self.a)?;
            (true, Some(diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
        } else {
            (false, None)
        };
        let convex_diffs = second_diffs(self.a, self.b)?;
        let min_convex = convex_diffs.iter().copied().fold(f64::INFINITY, f64::min);

        // Monotonicity over the full domain on the same half-offset grid.
        let h = self.b / grid_points as f64;
        let full: Vec<f64> = (0..grid_points)
            .map(|j| self.eval((j as f64 + 0.5) * h))
            .collect::<Result<_>>()?;
        let monotone = full.windows(2).all(|w| w[1] <= w[0] + 1e-9);

        Ok(CurvatureReport {
            concave_segment_checked: concave_checked,
            max_second_difference_concave: max_concave,
            min_second_difference_convex: min_convex,
            scale,
            concave_ok: max_concave.is_none_or(|d| d <= tol),
            convex_ok: min_convex >= -tol,
            monotone_nonincreasing: monotone,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_linear() -> ExpectedCost {
        ExpectedCost::new(CostFunction::linear(1.0), Prior::uniform(1.0, 2.0)).unwrap()
    }

    #[test]
    fn k_at_zero_is_mean() {
        // K(0) = E[f] = 1.5 for Uniform[1,2] with unit linear cost.
        assert!((uniform_linear().eval(0.0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn k_in_convex_region() {
        // K(s) = (b - s)^2 / (2 (b - a)): K(1.5) = 0.125.
        assert!((uniform_linear().eval(1.5).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn k_at_support_top_is_zero() {
        assert_eq!(uniform_linear().eval(2.0).unwrap(), 0.0);
        let ec = ExpectedCost::new(
            CostFunction::sqrt(1.0),
            Prior::truncated_exponential(1.0, 3.0, 1.0),
        )
        .unwrap();
        assert!(ec.eval(3.0).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        assert!(matches!(uniform_linear().eval(-0.5), Err(Error::Domain(_))));
        assert!(matches!(uniform_linear().eval(2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn quadrature_matches_closed_form_on_grid() {
        let ec = uniform_linear();
        for k in 0..=100 {
            let s = 2.0 * k as f64 / 100.0;
            let exact = ec.eval(s).unwrap();
            let quad = ec.eval_quadrature(s).unwrap();
            assert!((exact - quad).abs() <= 1e-8, "s={s}: {exact} vs {quad}");
        }
    }

    #[test]
    fn closed_form_covers_piecewise_cost() {
        let cost = CostFunction::piecewise_linear(vec![(0.0, 0.0), (0.5, 1.0), (2.0, 1.75)]);
        let ec = ExpectedCost::new(cost, Prior::uniform(0.5, 2.0)).unwrap();
        for k in 0..=40 {
            let s = 2.0 * k as f64 / 40.0;
            let exact = ec.eval(s).unwrap();
            let quad = ec.eval_quadrature(s).unwrap();
            assert!((exact - quad).abs() <= 1e-8, "s={s}: {exact} vs {quad}");
        }
    }

    #[test]
    fn linear_uniform_curvature_signs() {
        // Concave side is exactly linear (second differences 0); convex side
        // has second difference h^2 / (b - a) > 0.
        let report = uniform_linear().check_curvature(51).unwrap();
        assert!(report.concave_segment_checked);
        assert!(report.max_second_difference_concave.unwrap().abs() < 1e-10);
        let h: f64 = 1.0 / 51.0;
        assert!((report.min_second_difference_convex - h * h).abs() < 1e-9);
        assert!(report.all_ok());
    }

    #[test]
    fn zero_support_start_skips_concave_segment() {
        let ec = ExpectedCost::new(CostFunction::linear(1.0), Prior::uniform(0.0, 1.0)).unwrap();
        let report = ec.check_curvature(21).unwrap();
        assert!(!report.concave_segment_checked);
        assert!(report.max_second_difference_concave.is_none());
        assert!(report.all_ok());
    }

    #[test]
    fn truncated_exponential_sqrt_curvature() {
        let ec = ExpectedCost::new(
            CostFunction::sqrt(1.0),
            Prior::truncated_exponential(1.0, 3.0, 1.0),
        )
        .unwrap();
        assert!(ec.check_curvature(41).unwrap().all_ok());
    }

    #[test]
    fn monotone_nonincreasing_everywhere() {
        let ec = ExpectedCost::new(
            CostFunction::log1p(2.0),
            Prior::piecewise_constant(0.5, 2.5, vec![3.0, 2.0, 1.0]),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=50 {
            let s = 2.5 * k as f64 / 50.0;
            let v = ec.eval(s).unwrap();
            assert!(v <= prev + 1e-9);
            prev = v;
        }
    }

    #[test]
    fn invalid_pair_is_rejected() {
        assert!(ExpectedCost::new(CostFunction::linear(1.0), Prior::uniform(2.0, 1.0)).is_err());
    }
}
