//! Dissatisfaction (cost) functions: concave, increasing maps with V(0) = 0.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::IDENTITY_RTOL;

/// A concave, increasing dissatisfaction function with `V(0) = 0`.
///
/// Represented as closed-form families plus piecewise-linear so curvature
/// invariants are checkable and instances are serializable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CostFunction {
    /// `V(x) = slope * x`
    Linear { slope: f64 },
    /// `V(x) = scale * sqrt(x)`
    Sqrt { scale: f64 },
    /// `V(x) = scale * ln(1 + x)`
    Log1p { scale: f64 },
    /// Piecewise-linear interpolation of `(x, V(x))` breakpoints, extended
    /// beyond the last breakpoint with the final segment's slope.
    PiecewiseLinearConcave { breakpoints: Vec<(f64, f64)> },
}

impl CostFunction {
    pub fn linear(slope: f64) -> Self {
        CostFunction::Linear { slope }
    }

    pub fn sqrt(scale: f64) -> Self {
        CostFunction::Sqrt { scale }
    }

    pub fn log1p(scale: f64) -> Self {
        CostFunction::Log1p { scale }
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Self {
        CostFunction::PiecewiseLinearConcave { breakpoints }
    }

    /// Evaluate the dissatisfaction at shortfall `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(format!(
                "cost function argument must be non-negative, got {x}"
            )));
        }
        Ok(self.value_at(x))
    }

    /// Evaluation without the sign check; callers pass `x` already clamped
    /// through `max(x, 0)`.
    pub(crate) fn value_at(&self, x: f64) -> f64 {
        match self {
            CostFunction::Linear { slope } => slope * x,
            CostFunction::Sqrt { scale } => scale * x.sqrt(),
            CostFunction::Log1p { scale } => scale * x.ln_1p(),
            CostFunction::PiecewiseLinearConcave { breakpoints } => {
                eval_piecewise(breakpoints, x)
            }
        }
    }

    /// `W(x) = integral of V over [0, x]`, available in closed form for the
    /// families whose expected cost under a uniform prior is computed
    /// exactly (linear and piecewise linear).
    pub(crate) fn antiderivative(&self, x: f64) -> Option<f64> {
        match self {
            CostFunction::Linear { slope } => Some(0.5 * slope * x * x),
            CostFunction::PiecewiseLinearConcave { breakpoints } => {
                Some(piecewise_antiderivative(breakpoints, x))
            }
            _ => None,
        }
    }

    /// Interior kink locations of `V` (x-coordinates of piecewise-linear
    /// breakpoints); empty for smooth families.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match self {
            CostFunction::PiecewiseLinearConcave { breakpoints } => {
                breakpoints.iter().skip(1).map(|&(x, _)| x).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Invariant check on a 101-point grid over `[0, x_max]`: V(0) = 0,
    /// monotone non-decreasing, concave, plus structural checks for the
    /// piecewise family. Returns the list of violations (empty = valid).
    pub fn violations(&self, x_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            CostFunction::Linear { slope } => {
                if !slope.is_finite() || *slope < 0.0 {
                    out.push(format!("linear slope must be finite and >= 0, got {slope}"));
                }
            }
            CostFunction::Sqrt { scale } | CostFunction::Log1p { scale } => {
                if !scale.is_finite() || *scale < 0.0 {
                    out.push(format!("scale must be finite and >= 0, got {scale}"));
                }
            }
            CostFunction::PiecewiseLinearConcave { breakpoints } => {
                out.extend(piecewise_violations(breakpoints));
            }
        }
        if !out.is_empty() {
            return out;
        }

        let x_max = if x_max > 0.0 && x_max.is_finite() { x_max } else { 1.0 };
        let scale = self.value_at(x_max).abs().max(1.0);
        let tol = IDENTITY_RTOL * scale;
        let n = 101usize;
        let h = x_max / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|k| self.value_at(k as f64 * h)).collect();

        if values[0].abs() > tol {
            out.push(format!("V(0) != 0 (got {})", values[0]));
        }
        if values.windows(2).any(|w| w[1] < w[0] - tol) {
            out.push("cost function is not monotone non-decreasing on the check grid".into());
        }
        // Uniform grid: concavity <=> second differences <= 0.
        if values
            .windows(3)
            .any(|w| w[2] - 2.0 * w[1] + w[0] > tol)
        {
            out.push("cost function is not concave on the check grid".into());
        }
        out
    }

    /// Pointwise equality with `other` on a 101-point grid over `[0, x_max]`
    /// within relative tolerance [`IDENTITY_RTOL`].
    pub fn approx_same(&self, other: &CostFunction, x_max: f64) -> bool {
        let x_max = if x_max > 0.0 && x_max.is_finite() { x_max } else { 1.0 };
        let n = 101usize;
        let h = x_max / (n - 1) as f64;
        (0..n).all(|k| {
            let x = k as f64 * h;
            let a = self.value_at(x);
            let b = other.value_at(x);
            (a - b).abs() <= IDENTITY_RTOL * a.abs().max(b.abs()).max(1.0)
        })
    }
}

fn eval_piecewise(breakpoints: &[(f64, f64)], x: f64) -> f64 {
    if breakpoints.is_empty() {
        return 0.0;
    }
    if breakpoints.len() == 1 {
        return breakpoints[0].1;
    }
    let last = breakpoints.len() - 1;
    if x >= breakpoints[last].0 {
        let (x1, y1) = breakpoints[last - 1];
        let (x2, y2) = breakpoints[last];
        let slope = (y2 - y1) / (x2 - x1);
        return y2 + slope * (x - x2);
    }
    // x < last breakpoint: find the enclosing segment.
    let mut k = 0;
    while k + 1 < last && x >= breakpoints[k + 1].0 {
        k += 1;
    }
    let (x1, y1) = breakpoints[k];
    let (x2, y2) = breakpoints[k + 1];
    if x <= x1 {
        return y1;
    }
    y1 + (y2 - y1) / (x2 - x1) * (x - x1)
}

fn piecewise_antiderivative(breakpoints: &[(f64, f64)], x: f64) -> f64 {
    if breakpoints.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut prev = breakpoints[0];
    for &(bx, by) in breakpoints.iter().skip(1) {
        let (px, py) = prev;
        if x <= bx {
            let slope = (by - py) / (bx - px);
            let dx = x - px;
            return acc + py * dx + 0.5 * slope * dx * dx;
        }
        acc += 0.5 * (py + by) * (bx - px);
        prev = (bx, by);
    }
    // Beyond the last breakpoint: extend with the final slope.
    let last = breakpoints.len() - 1;
    let (x1, y1) = breakpoints[last - 1];
    let (x2, y2) = breakpoints[last];
    let slope = (y2 - y1) / (x2 - x1);
    let dx = x - x2;
    acc + y2 * dx + 0.5 * slope * dx * dx
}

fn piecewise_violations(breakpoints: &[(f64, f64)]) -> Vec<String> {
    let mut out = Vec::new();
    if breakpoints.is_empty() {
        out.push("piecewise cost needs at least one breakpoint".into());
        return out;
    }
    if breakpoints.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        out.push("piecewise breakpoints must be finite".into());
        return out;
    }
    let (x0, y0) = breakpoints[0];
    if x0 != 0.0 || y0.abs() > IDENTITY_RTOL {
        out.push(format!("V(0) != 0 (first breakpoint must be (0, 0), got ({x0}, {y0}))"));
    }
    if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
        out.push("piecewise breakpoint x-coordinates must be strictly increasing".into());
        return out;
    }
    let slopes: Vec<f64> = breakpoints
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    if slopes.iter().any(|&s| s < -IDENTITY_RTOL) {
        out.push("piecewise segment slopes must be non-negative (monotonicity)".into());
    }
    if slopes.windows(2).any(|w| w[1] > w[0] + IDENTITY_RTOL) {
        out.push("piecewise segment slopes must be non-increasing (concavity)".into());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_at_zero() {
        assert_eq!(CostFunction::linear(2.0).eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_of_four() {
        assert_eq!(CostFunction::sqrt(1.0).eval(4.0).unwrap(), 2.0);
    }

    #[test]
    fn piecewise_interpolates_between_breakpoints() {
        // Segment (1,1)-(3,2) has slope 0.5: V(2) = 1.5.
        let v = CostFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]);
        assert_eq!(v.eval(2.0).unwrap(), 1.5);
    }

    #[test]
    fn piecewise_extends_past_last_breakpoint() {
        let v = CostFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]);
        assert_eq!(v.eval(5.0).unwrap(), 3.0);
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(
            CostFunction::linear(1.0).eval(-0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nonzero_origin_is_flagged() {
        let v = CostFunction::piecewise_linear(vec![(0.0, 0.5), (1.0, 1.0)]);
        let viols = v.violations(1.0);
        assert!(viols.iter().any(|m| m.contains("V(0) != 0")), "{viols:?}");
    }

    #[test]
    fn convex_piecewise_is_flagged() {
        let v = CostFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]);
        assert!(!v.violations(2.0).is_empty());
    }

    #[test]
    fn antiderivative_of_piecewise() {
        // V on [(0,0),(1,1),(3,2)]: W(1) = 0.5, W(3) = 0.5 + 3.0.
        let v = CostFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]);
        assert!((v.antiderivative(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((v.antiderivative(3.0).unwrap() - 3.5).abs() < 1e-15);
        // W(2) = 0.5 + integral of (1 + 0.5(u-1)) over [1,2] = 0.5 + 1.25.
        assert!((v.antiderivative(2.0).unwrap() - 1.75).abs() < 1e-15);
    }
}
