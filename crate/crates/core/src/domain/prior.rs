//! Non-increasing priors on a finite support `[a, b]`.

use serde::{Deserialize, Serialize};

use crate::quad;

use super::IDENTITY_RTOL;

/// Quadrature tolerance for the normalization invariant.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PriorKind {
    /// Constant density `1 / (b - a)`.
    Uniform,
    /// Density proportional to `exp(-rate * f)`, truncated to `[a, b]`.
    TruncatedExponential { rate: f64 },
    /// Constant density per equal-width bin over `[a, b]`, non-increasing.
    PiecewiseConstantNonIncreasing { densities: Vec<f64> },
}

/// A probability density on `[lo, hi]`, non-increasing over its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub lo: f64,
    pub hi: f64,
    pub kind: PriorKind,
}

impl Prior {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Prior { lo, hi, kind: PriorKind::Uniform }
    }

    pub fn truncated_exponential(lo: f64, hi: f64, rate: f64) -> Self {
        Prior { lo, hi, kind: PriorKind::TruncatedExponential { rate } }
    }

    /// Piecewise-constant prior over equal-width bins; `weights` are
    /// relative bin masses per unit length and get normalized here.
    pub fn piecewise_constant(lo: f64, hi: f64, weights: Vec<f64>) -> Self {
        let width = (hi - lo) / weights.len().max(1) as f64;
        let total: f64 = weights.iter().map(|w| w * width).sum();
        let densities = if total > 0.0 {
            weights.iter().map(|w| w / total).collect()
        } else {
            weights
        };
        Prior { lo, hi, kind: PriorKind::PiecewiseConstantNonIncreasing { densities } }
    }

    /// Density at `f`; zero outside `[lo, hi]`.
    pub fn density(&self, f: f64) -> f64 {
        if f < self.lo || f > self.hi {
            return 0.0;
        }
        match &self.kind {
            PriorKind::Uniform => 1.0 / (self.hi - self.lo),
            PriorKind::TruncatedExponential { rate } => {
                let z = 1.0 - (-rate * (self.hi - self.lo)).exp();
                rate * (-rate * (f - self.lo)).exp() / z
            }
            PriorKind::PiecewiseConstantNonIncreasing { densities } => {
                if densities.is_empty() {
                    return 0.0;
                }
                let width = (self.hi - self.lo) / densities.len() as f64;
                let k = (((f - self.lo) / width) as usize).min(densities.len() - 1);
                densities[k]
            }
        }
    }

    /// Interior discontinuities of the density (bin edges).
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            PriorKind::PiecewiseConstantNonIncreasing { densities } if densities.len() > 1 => {
                let width = (self.hi - self.lo) / densities.len() as f64;
                (1..densities.len()).map(|k| self.lo + k as f64 * width).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Integral of the density over the support, by the module quadrature.
    pub fn normalization(&self) -> f64 {
        if self.lo >= self.hi {
            return 0.0;
        }
        quad::integrate_with_breaks(
            |f| self.density(f),
            self.lo,
            self.hi,
            &self.kinks(),
            NORMALIZATION_TOL * 0.1,
        )
    }

    /// Invariant check: support sanity, parameter sanity, normalization
    /// within [`NORMALIZATION_TOL`], and the non-increasing property on a
    /// sampled grid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo < 0.0 {
            out.push(format!("support bounds must be finite with a >= 0, got [{}, {}]", self.lo, self.hi));
        }
        if self.lo >= self.hi {
            out.push(format!("support must satisfy a < b, got [{}, {}]", self.lo, self.hi));
        }
        match &self.kind {
            PriorKind::Uniform => {}
            PriorKind::TruncatedExponential { rate } => {
                if !rate.is_finite() || *rate <= 0.0 {
                    out.push(format!("truncated-exponential rate must be > 0, got {rate}"));
                }
            }
            PriorKind::PiecewiseConstantNonIncreasing { densities } => {
                if densities.is_empty() {
                    out.push("piecewise-constant prior needs at least one bin".into());
                }
                if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
                    out.push("piecewise-constant densities must be finite and >= 0".into());
                }
            }
        }
        if !out.is_empty() {
            return out;
        }

        let total = self.normalization();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            out.push(format!("density must integrate to 1, got {total}"));
        }
        // Sampled midpoints avoid bin edges, where density(f) takes the
        // right-bin value.
        let n = 101usize;
        let h = (self.hi - self.lo) / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|k| self.density(self.lo + (k as f64 + 0.5) * h))
            .collect();
        if samples.windows(2).any(|w| w[0] < w[1] - IDENTITY_RTOL) {
            out.push("density must be non-increasing over the support".into());
        }
        out
    }
}
