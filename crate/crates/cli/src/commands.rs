//! Subcommand implementations. Each returns the rendered document plus an
//! exit classification; `main` handles file placement and worker fan-out.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use shortfall_core::global_oracle::{
    solve_concave_exact, solve_expected_grid, DEFAULT_CORNER_LIMIT, DEFAULT_GRID_LIMIT,
};
use shortfall_core::known_solver::solve_linprog;
use shortfall_core::simulator;
use shortfall_core::unknown_solver::sym_alloc;
use shortfall_core::CostFunction;

use crate::output::{render_csv, render_json, BUILD_ID};
use crate::scenario::{parse_scenario, FormatSpec, Scenario};
use crate::verify::{run_verify, scenario_policy, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl From<FormatSpec> for Format {
    fn from(f: FormatSpec) -> Self {
        match f {
            FormatSpec::Json => Format::Json,
            FormatSpec::Csv => Format::Csv,
        }
    }
}

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct CommandOptions {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub oracle: bool,
    pub trace: Option<PathBuf>,
    pub grid_step: f64,
}

impl Default for CommandOptions {
    fn default() -> Self {
        CommandOptions { seed: None, format: None, oracle: false, trace: None, grid_step: 0.01 }
    }
}

/// A rendered result ready for placement.
pub struct CommandOutput {
    pub document: String,
    pub format: Format,
    /// Destination from the scenario's `[output]` section, if any.
    pub scenario_out: Option<PathBuf>,
    /// Human-readable table printed to stdout in addition to any file
    /// output (verify only).
    pub table: Option<String>,
    /// True when a verification check failed (exit code 1).
    pub verification_failed: bool,
}

/// Errors that map to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn load_scenario(path: &Path) -> Result<Scenario, InputError> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn effective_seed(scenario: &Scenario, opts: &CommandOptions) -> u64 {
    opts.seed
        .or_else(|| scenario.simulation.as_ref().map(|s| s.seed))
        .unwrap_or(0)
}

fn effective_format(scenario: &Scenario, opts: &CommandOptions) -> Format {
    opts.format
        .or_else(|| scenario.output.as_ref().and_then(|o| o.format).map(Format::from))
        .unwrap_or(Format::Json)
}

fn scenario_out(scenario: &Scenario) -> Option<PathBuf> {
    scenario.output.as_ref().and_then(|o| o.path.as_ref()).map(PathBuf::from)
}

fn base_document(command: &str, scenario_name: &str) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("build".into(), json!(BUILD_ID));
    map.insert("command".into(), json!(command));
    map.insert("scenario".into(), json!(scenario_name));
    map
}

pub fn cmd_solve_known(
    scenario: &Scenario,
    name: &str,
    opts: &CommandOptions,
) -> Result<CommandOutput, InputError> {
    let instance = scenario
        .known_instance()
        .ok_or_else(|| InputError(format!("{name}: solve-known requires a known instance")))?;
    let report = solve_linprog(&instance).map_err(|e| InputError(format!("{name}: {e}")))?;

    let mut doc = base_document("solve-known", name);
    doc.insert("users".into(), json!(instance.user_count()));
    doc.insert("budget".into(), json!(instance.budget));
    doc.insert("allocation".into(), json!(report.allocation.rates));
    doc.insert("slack".into(), json!(report.allocation.slack));
    doc.insert("lp_objective".into(), json!(report.lp_objective));
    doc.insert("true_objective".into(), json!(report.true_objective));
    doc.insert("fractional_user".into(), json!(report.fractional_user));
    doc.insert("sort_order".into(), json!(report.sort_order));

    if opts.oracle {
        if instance.user_count() > DEFAULT_CORNER_LIMIT {
            return Err(InputError(format!(
                "{name}: --oracle supports at most {DEFAULT_CORNER_LIMIT} users"
            )));
        }
        let oracle = solve_concave_exact(&instance).map_err(|e| InputError(format!("{name}: {e}")))?;
        let max_v = instance
            .costs
            .iter()
            .zip(&instance.mean_rates)
            .map(|(c, &f)| c.eval(f).unwrap_or(f64::NAN))
            .fold(0.0, f64::max);
        doc.insert(
            "oracle".into(),
            json!({
                "objective": oracle.objective,
                "allocation": oracle.allocation.rates,
                "corners_evaluated": oracle.corners_evaluated,
                "gap": report.true_objective - oracle.objective,
                "gap_bound": 2.0 / instance.user_count() as f64 * max_v,
            }),
        );
    }

    let format = effective_format(scenario, opts);
    let document = match format {
        Format::Json => render_json(Value::Object(doc)),
        Format::Csv => {
            let header = [
                "user", "mean_rate", "rate", "shortfall", "dissatisfaction", "lp_objective",
                "true_objective", "budget", "slack", "build",
            ];
            let rows: Vec<Vec<Value>> = (0..instance.user_count())
                .map(|i| {
                    let f = instance.mean_rates[i];
                    let s = report.allocation.rates[i];
                    let shortfall = (f - s).max(0.0);
                    vec![
                        json!(i),
                        json!(f),
                        json!(s),
                        json!(shortfall),
                        json!(instance.costs[i].eval(shortfall).unwrap_or(f64::NAN)),
                        json!(report.lp_objective),
                        json!(report.true_objective),
                        json!(instance.budget),
                        json!(report.allocation.slack),
                        json!(BUILD_ID),
                    ]
                })
                .collect();
            render_csv(&header, &rows)
        }
    };
    Ok(CommandOutput {
        document,
        format,
        scenario_out: scenario_out(scenario),
        table: None,
        verification_failed: false,
    })
}

pub fn cmd_solve_unknown(
    scenario: &Scenario,
    name: &str,
    opts: &CommandOptions,
) -> Result<CommandOutput, InputError> {
    let instance = scenario
        .unknown_instance()
        .ok_or_else(|| InputError(format!("{name}: solve-unknown requires an unknown instance")))?;
    let report = sym_alloc(&instance).map_err(|e| InputError(format!("{name}: {e}")))?;

    let mut doc = base_document("solve-unknown", name);
    doc.insert("users".into(), json!(instance.user_count()));
    doc.insert("budget".into(), json!(instance.budget));
    doc.insert("allocation".into(), json!(report.allocation.rates));
    doc.insert("slack".into(), json!(report.allocation.slack));
    doc.insert("n_star".into(), json!(report.n_star));
    doc.insert("beta_star".into(), json!(report.beta_star));
    doc.insert("v_star".into(), json!(report.v_star));
    doc.insert("normalized_objective".into(), json!(report.normalized_objective));
    doc.insert("used_water_level".into(), json!(report.used_water_level));
    doc.insert("water_level_value".into(), json!(report.water_level_value));
    doc.insert("beta_grid_lipschitz".into(), json!(report.beta_grid_lipschitz));
    doc.insert(
        "per_n".into(),
        Value::Array(
            report
                .per_n_table
                .iter()
                .map(|e| json!({"n": e.n, "feasible": e.feasible, "value": e.value, "beta": e.beta}))
                .collect(),
        ),
    );

    if opts.oracle {
        if instance.user_count() > DEFAULT_GRID_LIMIT {
            return Err(InputError(format!(
                "{name}: --oracle supports at most {DEFAULT_GRID_LIMIT} users for grid search"
            )));
        }
        let oracle = solve_expected_grid(&instance, opts.grid_step)
            .map_err(|e| InputError(format!("{name}: {e}")))?;
        let lipschitz = oracle.grid_lipschitz.unwrap_or(0.0);
        doc.insert(
            "oracle".into(),
            json!({
                "objective": oracle.objective,
                "allocation": oracle.allocation.rates,
                "grid_step": opts.grid_step,
                "grid_lipschitz": lipschitz,
                "points_evaluated": oracle.corners_evaluated,
                "difference": (report.normalized_objective - oracle.objective).abs(),
                "tolerance": opts.grid_step * lipschitz + 1e-6,
            }),
        );
    }

    let format = effective_format(scenario, opts);
    let document = match format {
        Format::Json => render_json(Value::Object(doc)),
        Format::Csv => {
            let header = [
                "user", "rate", "n_star", "beta_star", "v_star", "normalized_objective",
                "used_water_level", "budget", "build",
            ];
            let rows: Vec<Vec<Value>> = report
                .allocation
                .rates
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    vec![
                        json!(i),
                        json!(s),
                        json!(report.n_star),
                        json!(report.beta_star),
                        json!(report.v_star),
                        json!(report.normalized_objective),
                        json!(report.used_water_level),
                        json!(instance.budget),
                        json!(BUILD_ID),
                    ]
                })
                .collect();
            render_csv(&header, &rows)
        }
    };
    Ok(CommandOutput {
        document,
        format,
        scenario_out: scenario_out(scenario),
        table: None,
        verification_failed: false,
    })
}

pub fn cmd_simulate(
    scenario: &Scenario,
    name: &str,
    opts: &CommandOptions,
) -> Result<CommandOutput, InputError> {
    let sim = scenario
        .simulation
        .as_ref()
        .ok_or_else(|| InputError(format!("{name}: simulate requires a [simulation] section")))?;
    let seed = effective_seed(scenario, opts);
    let (availability, consumption) = scenario
        .simulation_processes(seed)
        .expect("simulation section present");
    let costs: Vec<CostFunction> = scenario.instance.costs.iter().map(|c| c.to_core()).collect();
    let (policy, policy_source) =
        scenario_policy(scenario).map_err(|e| InputError(format!("{name}: {e}")))?;

    let trace_path: Option<PathBuf> = opts
        .trace
        .clone()
        .or_else(|| scenario.output.as_ref().and_then(|o| o.trace_path.as_ref().map(PathBuf::from)));

    let result = if let Some(trace_path) = &trace_path {
        let file = fs::File::create(trace_path)
            .map_err(|e| InputError(format!("{}: {e}", trace_path.display())))?;
        let mut writer = std::io::BufWriter::new(file);
        simulator::run_with_trace(
            &consumption,
            &availability,
            &policy,
            &costs,
            sim.horizon,
            sim.buffer_cap,
            &mut writer,
        )
        .map_err(|e| InputError(format!("{name}: {e}")))?
    } else {
        simulator::run(&consumption, &availability, &policy, &costs, sim.horizon, sim.buffer_cap)
            .map_err(|e| InputError(format!("{name}: {e}")))?
    };

    let mut doc = base_document("simulate", name);
    doc.insert("seed".into(), json!(seed));
    doc.insert("horizon".into(), json!(sim.horizon));
    doc.insert("buffer_cap".into(), json!(sim.buffer_cap));
    doc.insert("availability_mean".into(), json!(availability.mean()));
    doc.insert("policy".into(), json!(policy.rates));
    doc.insert("policy_source".into(), json!(policy_source));
    doc.insert(
        "result".into(),
        serde_json::to_value(&result).expect("simulation result serializes"),
    );

    let format = effective_format(scenario, opts);
    let document = match format {
        Format::Json => render_json(Value::Object(doc)),
        Format::Csv => {
            let header = [
                "user", "policy_rate", "avg_service", "avg_shortfall", "shortfall_se",
                "dissatisfaction", "final_queue", "max_queue", "queue_over_horizon",
                "realized_availability", "normalized_dissatisfaction", "horizon", "seed", "build",
            ];
            let rows: Vec<Vec<Value>> = (0..consumption.len())
                .map(|i| {
                    vec![
                        json!(i),
                        json!(policy.rates[i]),
                        json!(result.avg_service[i]),
                        json!(result.avg_shortfall[i]),
                        json!(result.shortfall_se.get(i)),
                        json!(result.dissatisfaction[i]),
                        json!(result.final_queue[i]),
                        json!(result.max_queue[i]),
                        json!(result.queue_over_horizon[i]),
                        json!(result.realized_availability),
                        json!(result.normalized_dissatisfaction),
                        json!(result.horizon),
                        json!(seed),
                        json!(BUILD_ID),
                    ]
                })
                .collect();
            render_csv(&header, &rows)
        }
    };
    Ok(CommandOutput {
        document,
        format,
        scenario_out: scenario_out(scenario),
        table: None,
        verification_failed: false,
    })
}

pub fn cmd_verify(
    scenario: &Scenario,
    name: &str,
    opts: &CommandOptions,
) -> Result<CommandOutput, InputError> {
    let seed = effective_seed(scenario, opts);
    let report = run_verify(scenario, seed, opts.grid_step);
    let table = render_table(name, &report);

    let mut doc = base_document("verify", name);
    doc.insert("seed".into(), json!(report.seed));
    doc.insert("grid_step".into(), json!(opts.grid_step));
    doc.insert("passed".into(), json!(report.passed));
    doc.insert(
        "checks".into(),
        serde_json::to_value(&report.checks).expect("verify rows serialize"),
    );

    let format = effective_format(scenario, opts);
    let document = match format {
        Format::Json => render_json(Value::Object(doc)),
        Format::Csv => {
            let header = ["check", "passed", "detail", "build"];
            let rows: Vec<Vec<Value>> = report
                .checks
                .iter()
                .map(|r| vec![json!(r.name), json!(r.passed), json!(r.detail), json!(BUILD_ID)])
                .collect();
            render_csv(&header, &rows)
        }
    };
    Ok(CommandOutput {
        document,
        format,
        scenario_out: scenario_out(scenario),
        table: Some(table),
        verification_failed: !report.passed,
    })
}

fn render_table(name: &str, report: &VerifyReport) -> String {
    let width = report.checks.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!("verify {name} (seed {})\n", report.seed);
    for row in &report.checks {
        let status = if row.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("  {status}  {:width$}  {}\n", row.name, row.detail));
    }
    out.push_str(&format!(
        "  {} of {} checks passed\n",
        report.checks.iter().filter(|r| r.passed).count(),
        report.checks.len()
    ));
    out
}
