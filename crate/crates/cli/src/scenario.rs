//! Scenario files: a single TOML document describing a problem instance,
//! an optional simulation section, and optional output settings.
//!
//! ```toml
//! version = 1
//!
//! [instance]
//! kind = "known"                # or "unknown"
//! budget = 4.0
//! costs = [
//!   { kind = "sqrt", scale = 1.0 },
//!   { kind = "linear", slope = 1.0 },
//! ]
//! mean_rates = [4.0, 2.0]       # known instances
//! # priors = [{ kind = "uniform", lo = 1.0, hi = 2.0 }, ...]   # unknown
//! # symmetric = true                                           # unknown
//!
//! [simulation]                  # optional
//! horizon = 100000
//! seed = 7
//! # buffer_cap = 4.0
//! availability = { kind = "constant", value = 4.0 }
//! consumption = [
//!   { kind = "deterministic", rate = 4.0 },
//!   { kind = "iid_scaled_bernoulli", peak = 4.0, prob = 0.5 },
//! ]
//! # policy_rates = [2.0, 2.0]   # optional override of the solved policy
//!
//! [output]                      # optional
//! path = "result.json"
//! format = "json"
//! ```
//!
//! Unknown keys are rejected everywhere; syntax errors carry the TOML
//! line/column, semantic errors name the offending field.

use serde::{Deserialize, Serialize};

use shortfall_core::simulator::{AvailabilityProcess, ConsumptionProcess};
use shortfall_core::{CostFunction, KnownInstance, Prior, UnknownInstance};

/// The only supported schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub instance: InstanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Known,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub budget: f64,
    pub costs: Vec<CostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<PriorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    Linear(SlopeSpec),
    Sqrt(ScaleSpec),
    Log1p(ScaleSpec),
    PiecewiseLinearConcave(PiecewiseSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeSpec {
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSpec {
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub breakpoints: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    Uniform(SupportSpec),
    TruncatedExponential(TruncExpSpec),
    PiecewiseConstant(PiecewiseConstantSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportSpec {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncExpSpec {
    pub lo: f64,
    pub hi: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConstantSpec {
    pub lo: f64,
    pub hi: f64,
    /// Relative bin masses per unit length over equal-width bins; they are
    /// normalized to integrate to 1.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer_cap: Option<f64>,
    pub availability: AvailabilitySpec,
    pub consumption: Vec<ConsumptionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_rates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AvailabilitySpec {
    Constant(ConstantSpec),
    IidUniform(SupportSpec),
    Cyclostationary(CycloSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSpec {
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycloSpec {
    pub phase_means: Vec<f64>,
    #[serde(default)]
    pub noise_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConsumptionSpec {
    Deterministic(RateSpec),
    IidScaledBernoulli(BernoulliSpec),
    IidUniform(SupportSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliSpec {
    pub peak: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatSpec {
    Json,
    Csv,
}

/// Parse and fully validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    let problems = scenario.validation_errors();
    if problems.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(problems))
    }
}

/// Serialize a scenario back to TOML (round-trips through
/// [`parse_scenario`]).
pub fn serialize_scenario(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// TOML syntax or shape error, with line/column rendered by the parser.
    Syntax(String),
    /// Semantic violations, one message per problem.
    Invalid(Vec<String>),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Syntax(msg) => write!(f, "scenario parse error: {msg}"),
            ScenarioError::Invalid(problems) => {
                write!(f, "invalid scenario:")?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

impl CostSpec {
    pub fn to_core(&self) -> CostFunction {
        match self {
            CostSpec::Linear(s) => CostFunction::linear(s.slope),
            CostSpec::Sqrt(s) => CostFunction::sqrt(s.scale),
            CostSpec::Log1p(s) => CostFunction::log1p(s.scale),
            CostSpec::PiecewiseLinearConcave(s) => {
                CostFunction::piecewise_linear(s.breakpoints.clone())
            }
        }
    }
}

impl PriorSpec {
    pub fn to_core(&self) -> Prior {
        match self {
            PriorSpec::Uniform(s) => Prior::uniform(s.lo, s.hi),
            PriorSpec::TruncatedExponential(s) => {
                Prior::truncated_exponential(s.lo, s.hi, s.rate)
            }
            PriorSpec::PiecewiseConstant(s) => {
                Prior::piecewise_constant(s.lo, s.hi, s.weights.clone())
            }
        }
    }
}

/// Deterministic seed derivation for per-process streams.
fn mix_seed(master: u64, salt: u64) -> u64 {
    let mut z = master.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Scenario {
    pub fn user_count(&self) -> usize {
        self.instance.costs.len()
    }

    /// Build the known instance; `None` for unknown scenarios.
    pub fn known_instance(&self) -> Option<KnownInstance> {
        let rates = self.instance.mean_rates.clone()?;
        if self.instance.kind != InstanceKind::Known {
            return None;
        }
        Some(KnownInstance::new(
            self.instance.costs.iter().map(CostSpec::to_core).collect(),
            rates,
            self.instance.budget,
        ))
    }

    /// Build the unknown instance; `None` for known scenarios.
    pub fn unknown_instance(&self) -> Option<UnknownInstance> {
        if self.instance.kind != InstanceKind::Unknown {
            return None;
        }
        let priors = self.instance.priors.as_ref()?;
        Some(UnknownInstance::new(
            self.instance.costs.iter().map(CostSpec::to_core).collect(),
            priors.iter().map(PriorSpec::to_core).collect(),
            self.instance.budget,
            self.instance.symmetric.unwrap_or(false),
        ))
    }

    /// Build the simulation processes with seeds derived from `seed`
    /// (availability on salt 0, user `i` on salt `i + 1`).
    pub fn simulation_processes(
        &self,
        seed: u64,
    ) -> Option<(AvailabilityProcess, Vec<ConsumptionProcess>)> {
        let sim = self.simulation.as_ref()?;
        let mut availability = match &sim.availability {
            AvailabilitySpec::Constant(s) => AvailabilityProcess::constant(s.value),
            AvailabilitySpec::IidUniform(s) => AvailabilityProcess::iid_uniform(s.lo, s.hi, 0),
            AvailabilitySpec::Cyclostationary(s) => {
                AvailabilityProcess::cyclostationary(s.phase_means.clone(), s.noise_amplitude, 0)
            }
        };
        availability.seed = mix_seed(seed, 0);
        let consumption = sim
            .consumption
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut p = match c {
                    ConsumptionSpec::Deterministic(s) => ConsumptionProcess::deterministic(s.rate),
                    ConsumptionSpec::IidScaledBernoulli(s) => {
                        ConsumptionProcess::scaled_bernoulli(s.peak, s.prob, 0)
                    }
                    ConsumptionSpec::IidUniform(s) => ConsumptionProcess::iid_uniform(s.lo, s.hi, 0),
                };
                p.seed = mix_seed(seed, i as u64 + 1);
                p
            })
            .collect();
        Some((availability, consumption))
    }

    /// All semantic problems with this scenario (empty = valid).
    pub fn validation_errors(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.version != SCHEMA_VERSION {
            out.push(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            ));
        }
        let m = self.instance.costs.len();
        if self.instance.budget <= 0.0 || !self.instance.budget.is_finite() {
            out.push("instance: budget must be positive".into());
        }
        match self.instance.kind {
            InstanceKind::Known => {
                if self.instance.priors.is_some() || self.instance.symmetric.is_some() {
                    out.push("instance: known instances take mean_rates, not priors/symmetric".into());
                }
                match &self.instance.mean_rates {
                    None => out.push("instance: known instances require mean_rates".into()),
                    Some(rates) if rates.len() != m => out.push(format!(
                        "instance: mean_rates has {} entries for {m} costs",
                        rates.len()
                    )),
                    _ => {
                        if let Some(inst) = self.known_instance() {
                            out.extend(inst.violations().into_iter().map(|v| format!("instance: {v}")));
                        }
                    }
                }
            }
            InstanceKind::Unknown => {
                if self.instance.mean_rates.is_some() {
                    out.push("instance: unknown instances take priors, not mean_rates".into());
                }
                match &self.instance.priors {
                    None => out.push("instance: unknown instances require priors".into()),
                    Some(priors) if priors.len() != m => out.push(format!(
                        "instance: priors has {} entries for {m} costs",
                        priors.len()
                    )),
                    _ => {
                        if let Some(inst) = self.unknown_instance() {
                            out.extend(inst.violations().into_iter().map(|v| format!("instance: {v}")));
                        }
                    }
                }
            }
        }

        if let Some(sim) = &self.simulation {
            if sim.horizon == 0 {
                out.push("simulation: horizon must be at least 1".into());
            }
            if sim.consumption.len() != m {
                out.push(format!(
                    "simulation: consumption has {} entries for {m} users",
                    sim.consumption.len()
                ));
            }
            if let Some(cap) = sim.buffer_cap {
                if cap < 0.0 || !cap.is_finite() {
                    out.push("simulation: buffer_cap must be non-negative".into());
                }
            }
            if let Some(rates) = &sim.policy_rates {
                if rates.len() != m {
                    out.push(format!(
                        "simulation: policy_rates has {} entries for {m} users",
                        rates.len()
                    ));
                }
                if rates.iter().any(|&s| s < 0.0 || !s.is_finite()) {
                    out.push("simulation: policy_rates must be non-negative".into());
                }
            }
            if let Some((availability, consumption)) = self.simulation_processes(sim.seed) {
                out.extend(
                    availability
                        .violations()
                        .into_iter()
                        .map(|v| format!("simulation availability: {v}")),
                );
                for (i, c) in consumption.iter().enumerate() {
                    out.extend(
                        c.violations()
                            .into_iter()
                            .map(|v| format!("simulation consumption {i}: {v}")),
                    );
                }
            }
        }
        out
    }
}
