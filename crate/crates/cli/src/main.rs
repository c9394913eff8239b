use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};

use shortfall_cli::commands::{
    cmd_simulate, cmd_solve_known, cmd_solve_unknown, cmd_verify, load_scenario, CommandOptions,
    CommandOutput, Format, InputError,
};
use shortfall_cli::output::write_atomic;
use shortfall_cli::scenario::Scenario;

/// Environment variable overriding the worker-thread count for multi-file
/// invocations.
const WORKERS_ENV: &str = "SHORTFALL_WORKERS";

#[derive(Parser)]
#[command(
    name = "shortfall",
    version = shortfall_cli::output::BUILD_ID,
    about = "Solvers and simulation for shortfall-cost resource allocation",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 input error.\n\
                  SHORTFALL_WORKERS overrides the worker count for multi-file runs."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the scenario's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file, or directory when several scenarios are given
    /// (default: the scenario's `[output]` path, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Also run the brute-force oracle and report the optimality gap
    /// (solve commands; size-limited).
    #[arg(long, global = true)]
    oracle: bool,

    /// Write a per-slot CSV trace to this path (simulate).
    #[arg(long, global = true)]
    trace: Option<PathBuf>,

    /// Grid step for the expected-cost oracle (solve-unknown --oracle,
    /// verify).
    #[arg(long, global = true, default_value_t = 0.01)]
    grid_step: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the known-consumption program by the greedy linearized rule.
    SolveKnown {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Solve the symmetric unknown-consumption program exactly.
    SolveUnknown {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Solve, then simulate the proportional policy on the scenario's
    /// processes.
    Simulate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn worker_count(jobs: usize) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .min(jobs.max(1))
}

fn run_one(
    path: &Path,
    command: &Command,
    opts: &CommandOptions,
) -> Result<CommandOutput, InputError> {
    let scenario: Scenario = load_scenario(path)?;
    let name = path.display().to_string();
    match command {
        Command::SolveKnown { .. } => cmd_solve_known(&scenario, &name, opts),
        Command::SolveUnknown { .. } => cmd_solve_unknown(&scenario, &name, opts),
        Command::Simulate { .. } => cmd_simulate(&scenario, &name, opts),
        Command::Verify { .. } => cmd_verify(&scenario, &name, opts),
    }
}

/// Where a scenario's document lands: explicit --out, the scenario's own
/// output path, or stdout.
fn placement(
    path: &Path,
    out: &Option<PathBuf>,
    multi: bool,
    output: &CommandOutput,
) -> Option<PathBuf> {
    if let Some(out) = out {
        if multi {
            let ext = match output.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            return Some(out.join(format!("{stem}.{ext}")));
        }
        return Some(out.clone());
    }
    output.scenario_out.clone()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenarios: &[PathBuf] = match &cli.command {
        Command::SolveKnown { scenarios }
        | Command::SolveUnknown { scenarios }
        | Command::Simulate { scenarios }
        | Command::Verify { scenarios } => scenarios,
    };
    let multi = scenarios.len() > 1;
    if multi && cli.trace.is_some() {
        eprintln!("error: --trace requires a single scenario");
        return ExitCode::from(2);
    }

    let opts = CommandOptions {
        seed: cli.seed,
        format: cli.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }),
        oracle: cli.oracle,
        trace: cli.trace.clone(),
        grid_step: cli.grid_step,
    };

    // Fan independent scenarios across workers; results are collected per
    // index and emitted in input order.
    let results: Vec<Option<Result<CommandOutput, InputError>>> =
        (0..scenarios.len()).map(|_| None).collect();
    let results = Mutex::new(results);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = worker_count(scenarios.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= scenarios.len() {
                    break;
                }
                let outcome = run_one(&scenarios[idx], &cli.command, &opts);
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });
    let results = results.into_inner().unwrap();

    let mut verification_failed = false;
    for (path, outcome) in scenarios.iter().zip(results) {
        match outcome.expect("every scenario processed") {
            Ok(output) => {
                if let Some(table) = &output.table {
                    print!("{table}");
                }
                verification_failed |= output.verification_failed;
                match placement(path, &cli.out, multi, &output) {
                    Some(dest) => {
                        if let Err(e) = write_atomic(&dest, &output.document) {
                            eprintln!("error: {}: {e}", dest.display());
                            return ExitCode::from(2);
                        }
                    }
                    // Commands with a table already talk to stdout; their
                    // document goes only to an explicit destination.
                    None if output.table.is_none() => print!("{}", output.document),
                    None => {}
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }

    if verification_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
