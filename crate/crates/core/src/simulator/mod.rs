//! Discrete-time simulation of the buffer/shortfall dynamics.
//!
//! Each slot `t`: the policy serves `S_i(t) = s_i * c(t) / c_bar` into
//! buffer `Q_i`, the user draws `F_i(t)`, the uncovered part is the
//! shortfall, and the buffer carries the surplus:
//!
//! ```text
//! kappa_i(t) = (F_i(t) - (Q_i(t) + S_i(t)))^+
//! Q_i(t+1)  = (Q_i(t) + S_i(t) - F_i(t))^+        [then min with B if capped]
//! ```
//!
//! Shortfall is computed before the cap is applied: a full buffer loses
//! stored resource, not shortfall accounting. Statistical outputs carry
//! batch-means standard errors (100 batches) because shortfall sequences
//! are autocorrelated through the queue.

mod process;

use std::io::Write;

use serde::Serialize;

use crate::domain::{Allocation, CostFunction, FEASIBILITY_TOL};
use crate::{Error, Result};

pub use process::{AvailabilityKind, AvailabilityProcess, ConsumptionKind, ConsumptionProcess};

/// Number of batches for batch-means standard errors.
pub const BATCH_COUNT: u64 = 100;

/// One step of the buffer recurrence. Returns `(next_queue, shortfall)`.
pub fn step(queue: f64, service: f64, consumption: f64, buffer_cap: Option<f64>) -> Result<(f64, f64)> {
    for (name, v) in [("queue", queue), ("service", service), ("consumption", consumption)] {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
        }
    }
    if let Some(cap) = buffer_cap {
        if cap < 0.0 || !cap.is_finite() {
            return Err(Error::Domain(format!("buffer cap must be non-negative, got {cap}")));
        }
        if queue > cap {
            return Err(Error::Domain(format!("queue {queue} exceeds buffer cap {cap}")));
        }
    }
    Ok(step_unchecked(queue, service, consumption, buffer_cap))
}

#[inline]
fn step_unchecked(queue: f64, service: f64, consumption: f64, buffer_cap: Option<f64>) -> (f64, f64) {
    let shortfall = (consumption - (queue + service)).max(0.0);
    let mut next = (queue + service - consumption).max(0.0);
    if let Some(cap) = buffer_cap {
        next = next.min(cap);
    }
    (next, shortfall)
}

/// Aggregated outcome of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub horizon: u64,
    /// Empirical average shortfall per user.
    pub avg_shortfall: Vec<f64>,
    /// Batch-means standard error of the shortfall average per user
    /// (empty when the horizon is shorter than [`BATCH_COUNT`]).
    pub shortfall_se: Vec<f64>,
    /// Empirical average service per user.
    pub avg_service: Vec<f64>,
    /// Dissatisfaction `V_i(avg_shortfall_i)` per user.
    pub dissatisfaction: Vec<f64>,
    /// `(1/m) * sum_i V_i(avg_shortfall_i)`.
    pub normalized_dissatisfaction: f64,
    pub final_queue: Vec<f64>,
    pub max_queue: Vec<f64>,
    /// `Q_i(T+1) / T` per user.
    pub queue_over_horizon: Vec<f64>,
    /// Empirical average of `c(t)`.
    pub realized_availability: f64,
    /// Slots where `sum_i S_i(t) > c(t)`; zero by the policy's construction.
    pub slot_feasibility_violations: u64,
}

/// The fraction sum is at most 1, but each per-slot product rounds once
/// more, so the float sum of services can exceed `c_t` by a few ulps. Shave
/// the largest entry until the budget holds exactly; exact allocations
/// (dyadic fractions, saturated deterministic policies) are never touched.
/// Returns the final served total.
fn enforce_slot_budget(services: &mut [f64], c_t: f64) -> f64 {
    let mut served: f64 = services.iter().sum();
    while served > c_t {
        let excess = served - c_t;
        let (argmax, &max) = services
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-empty services");
        services[argmax] = (max - excess).max(0.0);
        served = services.iter().sum();
    }
    served
}

/// Simulate the proportional policy `S_i(t) = s_i * c(t) / c_bar`.
pub fn run(
    consumption: &[ConsumptionProcess],
    availability: &AvailabilityProcess,
    policy: &Allocation,
    costs: &[CostFunction],
    horizon: u64,
    buffer_cap: Option<f64>,
) -> Result<SimulationResult> {
    run_impl(consumption, availability, policy, costs, horizon, buffer_cap, None)
}

/// Like [`run`], streaming a per-slot CSV trace
/// (`t, c, s_0.., f_0.., q_0.., kappa_0..`) into `sink`.
pub fn run_with_trace(
    consumption: &[ConsumptionProcess],
    availability: &AvailabilityProcess,
    policy: &Allocation,
    costs: &[CostFunction],
    horizon: u64,
    buffer_cap: Option<f64>,
    sink: &mut dyn Write,
) -> Result<SimulationResult> {
    run_impl(consumption, availability, policy, costs, horizon, buffer_cap, Some(sink))
}

#[allow(clippy::too_many_arguments)]
fn run_impl(
    consumption: &[ConsumptionProcess],
    availability: &AvailabilityProcess,
    policy: &Allocation,
    costs: &[CostFunction],
    horizon: u64,
    buffer_cap: Option<f64>,
    mut sink: Option<&mut dyn Write>,
) -> Result<SimulationResult> {
    let m = consumption.len();
    if m == 0 || policy.rates.len() != m || costs.len() != m {
        return Err(Error::Precondition(format!(
            "consumption ({}), policy ({}), and costs ({}) must have equal non-zero length",
            m,
            policy.rates.len(),
            costs.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1 slot".into()));
    }
    let mut problems = availability.violations();
    for (i, c) in consumption.iter().enumerate() {
        for v in c.violations() {
            problems.push(format!("consumption of user {i}: {v}"));
        }
    }
    if let Some(cap) = buffer_cap {
        if cap < 0.0 || !cap.is_finite() {
            problems.push(format!("buffer cap must be non-negative, got {cap}"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Precondition(problems.join("; ")));
    }

    let c_bar = availability.mean();
    if c_bar <= 0.0 {
        return Err(Error::Infeasible("availability mean must be positive".into()));
    }
    if policy.rates.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(Error::Infeasible("policy rates must be non-negative".into()));
    }
    let total_rate: f64 = policy.rates.iter().sum();
    if total_rate > c_bar + FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "policy total {total_rate} exceeds availability mean {c_bar}"
        )));
    }

    // Per-slot fractions of c(t). The feasibility check admits 1e-9 of
    // overshoot, which would break the slot budget systematically, so
    // fractions summing above 1 are normalized once up front. Residual
    // ulp-level overshoot from per-slot product rounding is handled by
    // `enforce_slot_budget`.
    let mut fractions: Vec<f64> = policy.rates.iter().map(|s| s / c_bar).collect();
    let frac_sum: f64 = fractions.iter().sum();
    if frac_sum > 1.0 {
        for f in fractions.iter_mut() {
            *f /= frac_sum;
        }
    }

    let mut avail = availability.sampler();
    let mut users: Vec<_> = consumption.iter().enumerate().map(|(i, c)| c.sampler(i)).collect();

    let batch_len = horizon / BATCH_COUNT;
    let mut batch_sums = if batch_len > 0 { vec![0.0; m * BATCH_COUNT as usize] } else { Vec::new() };

    let mut queues = vec![0.0f64; m];
    let mut max_queue = vec![0.0f64; m];
    let mut shortfall_sum = vec![0.0f64; m];
    let mut service_sum = vec![0.0f64; m];
    let mut availability_sum = 0.0f64;
    let mut violations = 0u64;
    let mut scratch_s = vec![0.0f64; m];
    let mut scratch_f = vec![0.0f64; m];
    let mut scratch_k = vec![0.0f64; m];

    if let Some(w) = sink.as_deref_mut() {
        let mut header = String::from("t,c");
        for label in ["s", "f", "q", "kappa"] {
            for i in 0..m {
                header.push_str(&format!(",{label}{i}"));
            }
        }
        writeln!(w, "{header}").map_err(|e| Error::Precondition(format!("trace write failed: {e}")))?;
    }

    for t in 1..=horizon {
        let c_t = avail.at(t);
        availability_sum += c_t;
        for i in 0..m {
            scratch_s[i] = fractions[i] * c_t;
        }
        let served = enforce_slot_budget(&mut scratch_s, c_t);
        for i in 0..m {
            let s_it = scratch_s[i];
            let f_it = users[i].at(t);
            let (next, kappa) = step_unchecked(queues[i], s_it, f_it, buffer_cap);
            queues[i] = next;
            if next > max_queue[i] {
                max_queue[i] = next;
            }
            shortfall_sum[i] += kappa;
            service_sum[i] += s_it;
            scratch_f[i] = f_it;
            scratch_k[i] = kappa;
        }
        if served > c_t {
            violations += 1;
        }
        if !batch_sums.is_empty() {
            let b = (t - 1) / batch_len;
            if b < BATCH_COUNT {
                let base = b as usize * m;
                for i in 0..m {
                    batch_sums[base + i] += scratch_k[i];
                }
            }
        }
        if let Some(w) = sink.as_deref_mut() {
            let mut line = format!("{t},{c_t}");
            for values in [&scratch_s, &scratch_f, &queues, &scratch_k] {
                for v in values.iter() {
                    line.push_str(&format!(",{v}"));
                }
            }
            writeln!(w, "{line}")
                .map_err(|e| Error::Precondition(format!("trace write failed: {e}")))?;
        }
    }

    let t_f = horizon as f64;
    let avg_shortfall: Vec<f64> = shortfall_sum.iter().map(|s| s / t_f).collect();
    let avg_service: Vec<f64> = service_sum.iter().map(|s| s / t_f).collect();
    let dissatisfaction: Vec<f64> = avg_shortfall
        .iter()
        .zip(costs)
        .map(|(&k, cost)| cost.value_at(k))
        .collect();
    let normalized = dissatisfaction.iter().sum::<f64>() / m as f64;

    let shortfall_se = if batch_len > 0 {
        let nb = BATCH_COUNT as f64;
        (0..m)
            .map(|i| {
                let means: Vec<f64> = (0..BATCH_COUNT as usize)
                    .map(|b| batch_sums[b * m + i] / batch_len as f64)
                    .collect();
                let mean = means.iter().sum::<f64>() / nb;
                let var = means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nb - 1.0);
                (var / nb).sqrt()
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(SimulationResult {
        horizon,
        avg_shortfall,
        shortfall_se,
        avg_service,
        dissatisfaction,
        normalized_dissatisfaction: normalized,
        final_queue: queues.clone(),
        max_queue,
        queue_over_horizon: queues.iter().map(|q| q / t_f).collect(),
        realized_availability: availability_sum / t_f,
        slot_feasibility_violations: violations,
    })
}

/// Single-queue stability diagnostic under constant service `s < f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTrace {
    /// `(t, Q(t)/t)` at logarithmically spaced checkpoints up to the horizon.
    pub checkpoints: Vec<(u64, f64)>,
    /// Slots `t` with `Q(t) = 0` (the queue is empty infinitely often).
    pub zero_queue_slots: u64,
    /// Zero-queue slots in the second half of the run.
    pub zero_queue_slots_late: u64,
    /// `Q(T)/T` at the horizon.
    pub final_ratio: f64,
}

/// Simulate one queue at constant service rate and report `Q(t)/t` decay.
pub fn stability_trace(
    consumption: &ConsumptionProcess,
    service: f64,
    horizon: u64,
) -> Result<StabilityTrace> {
    let problems = consumption.violations();
    if !problems.is_empty() {
        return Err(Error::Precondition(problems.join("; ")));
    }
    if service < 0.0 || !service.is_finite() {
        return Err(Error::Domain(format!("service rate must be >= 0, got {service}")));
    }
    if service >= consumption.mean() {
        return Err(Error::Precondition(format!(
            "stability requires s < f, got s = {service}, f = {}",
            consumption.mean()
        )));
    }
    if horizon < 1000 {
        return Err(Error::Precondition(format!(
            "stability trace needs a horizon of at least 1000 slots, got {horizon}"
        )));
    }

    // ~20 log-spaced checkpoints, always ending at the horizon.
    let mut marks: Vec<u64> = (0..20)
        .map(|j| (horizon as f64).powf(j as f64 / 19.0).round() as u64)
        .map(|t| t.clamp(1, horizon))
        .collect();
    marks.sort_unstable();
    marks.dedup();

    let mut sampler = consumption.sampler(0);
    let mut queue = 0.0f64;
    let mut zero = 0u64;
    let mut zero_late = 0u64;
    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut next_mark = 0usize;
    for t in 1..=horizon {
        // Q(t) is the state entering slot t.
        if queue == 0.0 {
            zero += 1;
            if t > horizon / 2 {
                zero_late += 1;
            }
        }
        if next_mark < marks.len() && marks[next_mark] == t {
            checkpoints.push((t, queue / t as f64));
            next_mark += 1;
        }
        let (next, _) = step_unchecked(queue, service, sampler.at(t), None);
        queue = next;
    }
    let final_ratio = checkpoints.last().map(|&(_, r)| r).unwrap_or(0.0);
    Ok(StabilityTrace { checkpoints, zero_queue_slots: zero, zero_queue_slots_late: zero_late, final_ratio })
}
