//! Availability and consumption processes with counter-based randomness.
//!
//! Randomness comes from ChaCha8 used as a counter-mode generator: every
//! process owns a stream (availability on stream 0, user `i` on stream
//! `i + 1`) and each slot `t` reads from its own block of that stream, so
//! draws are a pure function of `(seed, stream, t)`. Adding or removing
//! users never perturbs anyone else's draws.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One ChaCha block is 16 words; a slot never consumes more than a block.
const WORDS_PER_SLOT: u128 = 16;

pub(crate) struct SlotRng {
    rng: ChaCha8Rng,
}

impl SlotRng {
    pub(crate) fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SlotRng { rng }
    }

    /// Uniform draw in `[0, 1)` from slot `t`'s block.
    pub(crate) fn uniform_at(&mut self, t: u64) -> f64 {
        self.rng.set_word_pos(t as u128 * WORDS_PER_SLOT);
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AvailabilityKind {
    /// `c(t) = value` every slot.
    Constant { value: f64 },
    /// `c(t)` i.i.d. uniform on `[lo, hi]`; mean `(lo + hi) / 2`.
    IidUniform { lo: f64, hi: f64 },
    /// `c(t) = phase_means[t mod period] + noise`, noise i.i.d. uniform on
    /// `[-noise_amplitude, +noise_amplitude]`.
    Cyclostationary { phase_means: Vec<f64>, noise_amplitude: f64 },
}

/// The per-slot total resource process `c(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityProcess {
    pub kind: AvailabilityKind,
    pub seed: u64,
}

impl AvailabilityProcess {
    pub fn constant(value: f64) -> Self {
        AvailabilityProcess { kind: AvailabilityKind::Constant { value }, seed: 0 }
    }

    pub fn iid_uniform(lo: f64, hi: f64, seed: u64) -> Self {
        AvailabilityProcess { kind: AvailabilityKind::IidUniform { lo, hi }, seed }
    }

    pub fn cyclostationary(phase_means: Vec<f64>, noise_amplitude: f64, seed: u64) -> Self {
        AvailabilityProcess {
            kind: AvailabilityKind::Cyclostationary { phase_means, noise_amplitude },
            seed,
        }
    }

    /// The analytic long-term average, known from the parameters.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            AvailabilityKind::Constant { value } => *value,
            AvailabilityKind::IidUniform { lo, hi } => 0.5 * (lo + hi),
            AvailabilityKind::Cyclostationary { phase_means, .. } => {
                phase_means.iter().sum::<f64>() / phase_means.len().max(1) as f64
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.kind {
            AvailabilityKind::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    out.push(format!("constant availability must be >= 0, got {value}"));
                }
            }
            AvailabilityKind::IidUniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || *lo < 0.0 || lo > hi {
                    out.push(format!("availability range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"));
                }
            }
            AvailabilityKind::Cyclostationary { phase_means, noise_amplitude } => {
                if phase_means.is_empty() {
                    out.push("cyclostationary availability needs at least one phase".into());
                }
                if phase_means.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    out.push("phase means must be finite and >= 0".into());
                }
                if !noise_amplitude.is_finite() || *noise_amplitude < 0.0 {
                    out.push(format!("noise amplitude must be >= 0, got {noise_amplitude}"));
                }
                let min_mean = phase_means.iter().copied().fold(f64::INFINITY, f64::min);
                if *noise_amplitude > min_mean {
                    out.push("noise amplitude must not exceed the smallest phase mean (c(t) >= 0)".into());
                }
            }
        }
        out
    }

    pub(crate) fn sampler(&self) -> AvailabilitySampler {
        AvailabilitySampler { kind: self.kind.clone(), rng: SlotRng::new(self.seed, 0) }
    }
}

pub(crate) struct AvailabilitySampler {
    kind: AvailabilityKind,
    rng: SlotRng,
}

impl AvailabilitySampler {
    pub(crate) fn at(&mut self, t: u64) -> f64 {
        match &self.kind {
            AvailabilityKind::Constant { value } => *value,
            AvailabilityKind::IidUniform { lo, hi } => {
                lo + (hi - lo) * self.rng.uniform_at(t)
            }
            AvailabilityKind::Cyclostationary { phase_means, noise_amplitude } => {
                let phase = ((t - 1) % phase_means.len() as u64) as usize;
                let noise = noise_amplitude * (2.0 * self.rng.uniform_at(t) - 1.0);
                phase_means[phase] + noise
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConsumptionKind {
    /// `F(t) = rate` every slot.
    Deterministic { rate: f64 },
    /// `F(t) = peak` with probability `prob`, else 0; mean `peak * prob`.
    IidScaledBernoulli { peak: f64, prob: f64 },
    /// `F(t)` i.i.d. uniform on `[lo, hi]`; mean `(lo + hi) / 2`.
    IidUniform { lo: f64, hi: f64 },
}

/// One user's consumption process `F_i(t)`, bounded with a known mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionProcess {
    pub kind: ConsumptionKind,
    pub seed: u64,
}

impl ConsumptionProcess {
    pub fn deterministic(rate: f64) -> Self {
        ConsumptionProcess { kind: ConsumptionKind::Deterministic { rate }, seed: 0 }
    }

    pub fn scaled_bernoulli(peak: f64, prob: f64, seed: u64) -> Self {
        ConsumptionProcess { kind: ConsumptionKind::IidScaledBernoulli { peak, prob }, seed }
    }

    pub fn iid_uniform(lo: f64, hi: f64, seed: u64) -> Self {
        ConsumptionProcess { kind: ConsumptionKind::IidUniform { lo, hi }, seed }
    }

    /// The declared long-term average `f_i`.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            ConsumptionKind::Deterministic { rate } => *rate,
            ConsumptionKind::IidScaledBernoulli { peak, prob } => peak * prob,
            ConsumptionKind::IidUniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// Almost-sure bound on `F(t)`.
    pub fn peak_bound(&self) -> f64 {
        match &self.kind {
            ConsumptionKind::Deterministic { rate } => *rate,
            ConsumptionKind::IidScaledBernoulli { peak, .. } => *peak,
            ConsumptionKind::IidUniform { hi, .. } => *hi,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.kind {
            ConsumptionKind::Deterministic { rate } => {
                if !rate.is_finite() || *rate < 0.0 {
                    out.push(format!("deterministic rate must be >= 0, got {rate}"));
                }
            }
            ConsumptionKind::IidScaledBernoulli { peak, prob } => {
                if !peak.is_finite() || *peak < 0.0 {
                    out.push(format!("bernoulli peak must be >= 0, got {peak}"));
                }
                if !prob.is_finite() || !(0.0..=1.0).contains(prob) {
                    out.push(format!("bernoulli probability must be in [0, 1], got {prob}"));
                }
            }
            ConsumptionKind::IidUniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || *lo < 0.0 || lo > hi {
                    out.push(format!("consumption range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"));
                }
            }
        }
        out
    }

    pub(crate) fn sampler(&self, user_index: usize) -> ConsumptionSampler {
        ConsumptionSampler {
            kind: self.kind.clone(),
            rng: SlotRng::new(self.seed, user_index as u64 + 1),
        }
    }
}

pub(crate) struct ConsumptionSampler {
    kind: ConsumptionKind,
    rng: SlotRng,
}

impl ConsumptionSampler {
    pub(crate) fn at(&mut self, t: u64) -> f64 {
        match &self.kind {
            ConsumptionKind::Deterministic { rate } => *rate,
            ConsumptionKind::IidScaledBernoulli { peak, prob } => {
                if self.rng.uniform_at(t) < *prob {
                    *peak
                } else {
                    0.0
                }
            }
            ConsumptionKind::IidUniform { lo, hi } => lo + (hi - lo) * self.rng.uniform_at(t),
        }
    }
}
