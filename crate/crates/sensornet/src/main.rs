//! Command-line harness over the `sensornet` planning library.
//!
//! Subcommands: `solve` (one problem to a deployable plan), `sweep` (a cost
//! grid to a result table), `verify` (model self-checks), `simulate` (Monte
//! Carlo validation of a plan), and `dump-links` (the raw link table).
//!
//! Exit codes: 0 on success, 2 for an infeasible problem, 3 for a solver or
//! self-check failure, 4 for configuration errors (bad flags, unreadable
//! files, invalid scenarios).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sensornet::link::LinkTable;
use sensornet::montecarlo::{
    simulate_dynamic, simulate_static_analog, simulate_static_digital, SimOptions, SimReport,
    DEFAULT_INTERVALS, DEFAULT_TRIALS,
};
use sensornet::objective::Scheme;
use sensornet::pipeline::{
    emit_results, mix_seed, render_rows, restriction_mask, run_sweep, solve_and_round,
    verify_scenario, OutputFormat, PlanOutcome, RunConfig,
};
use sensornet::relax::{ProblemId, SolveError, SolveOptions};
use sensornet::rounding::DEFAULT_DRAWS;
use sensornet::scenario::{load_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "sensornet",
    version,
    about = "Joint sensor placement, power-class, and bandwidth planning \
             for energy-harvesting sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one planning problem and round it to a deployable plan (JSON).
    Solve(SolveArgs),
    /// Sweep the cost budget and tabulate relaxed/rounded/simulated errors.
    Sweep(SweepArgs),
    /// Run the model self-checks on a scenario.
    Verify(VerifyArgs),
    /// Validate a rounded plan against a Monte Carlo simulation (JSON).
    Simulate(SimulateArgs),
    /// Print the per-(location, type, bandwidth) link table as CSV.
    DumpLinks(DumpLinksArgs),
}

/// Flags shared by every solving subcommand.
#[derive(Args)]
struct ProblemArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Problem to solve: static-lops, static-blops, dynamic-lops,
    /// dynamic-blops, min-cost-static, or min-cost-dynamic.
    #[arg(long, value_parser = ProblemId::from_str)]
    problem: ProblemId,
    /// Cost budget override (budget problems; defaults to the scenario's).
    #[arg(long)]
    lambda: Option<f64>,
    /// Spectrum budget override: channels for analog problems, hertz for
    /// digital ones.
    #[arg(long)]
    spectrum: Option<f64>,
    /// Estimation-error target (min-cost problems).
    #[arg(long)]
    target: Option<f64>,
    /// Link scheme for min-cost-static: analog or digital.
    #[arg(long, default_value = "analog", value_parser = parse_scheme)]
    scheme: Scheme,
    /// Randomized-rounding draws.
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    draws: usize,
    /// Keep only this sensor type deployable (index into sensor_types).
    #[arg(long)]
    restrict_type: Option<usize>,
    /// Keep only this bandwidth slot deployable (index into bandwidths).
    #[arg(long)]
    restrict_band: Option<usize>,
    /// Seed for rounding and simulation.
    #[arg(long, env = "SENSORNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated, strictly increasing cost budgets, one sweep point
    /// each.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Monte Carlo trials per point (0 skips validation).
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Worker threads (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv", value_parser = OutputFormat::from_str)]
    format: OutputFormat,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Print the report as JSON instead of one line per check.
    #[arg(long)]
    json: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Tracking intervals per trial (dynamic problems).
    #[arg(long, default_value_t = DEFAULT_INTERVALS)]
    intervals: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DumpLinksArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s.to_ascii_lowercase().as_str() {
        "analog" => Ok(Scheme::Analog),
        "digital" => Ok(Scheme::Digital),
        other => Err(format!("unknown scheme '{other}', expected analog or digital")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version print to stdout and succeed; everything
            // else is a configuration error.
            let code = if err.use_stderr() { 4 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), SolveError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::DumpLinks(args) => cmd_dump_links(args),
    }
}

fn load(path: &Path) -> Result<(Scenario, LinkTable), SolveError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolveError::Config(format!("cannot read {}: {e}", path.display())))?;
    let scenario = load_scenario(&text).map_err(|e| SolveError::Config(e.to_string()))?;
    let table = LinkTable::build(&scenario).map_err(|e| SolveError::Config(e.to_string()))?;
    Ok((scenario, table))
}

fn write_or_print(text: &str, output: Option<&Path>) -> Result<(), SolveError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| SolveError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Translate the shared problem flags into solver options.
fn build_options(args: &ProblemArgs, table: &LinkTable) -> Result<SolveOptions, SolveError> {
    let cell_mask = if args.restrict_type.is_some() || args.restrict_band.is_some() {
        Some(restriction_mask(table.dims, args.restrict_type, args.restrict_band)?)
    } else {
        None
    };
    Ok(SolveOptions {
        cost_cap: args.lambda,
        spectrum_cap: args.spectrum,
        error_target: args.target,
        min_cost_scheme: args.scheme,
        round_seed: args.seed,
        round_draws: args.draws,
        cell_mask,
        ..SolveOptions::default()
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value)
        .expect("reports hold only plain data and always serialize");
    text.push('\n');
    text
}

fn cmd_solve(args: SolveArgs) -> Result<(), SolveError> {
    let (scenario, table) = load(&args.problem.scenario)?;
    let options = build_options(&args.problem, &table)?;
    let outcome = solve_and_round(&scenario, &table, args.problem.problem, &options)?;
    write_or_print(&to_pretty_json(&outcome), args.output.as_deref())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), SolveError> {
    if !args.lambdas.windows(2).all(|w| w[0] < w[1]) {
        return Err(SolveError::Config(
            "the budget grid must be strictly increasing".into(),
        ));
    }
    let (scenario, table) = load(&args.problem.scenario)?;
    let options = build_options(&args.problem, &table)?;
    let config = RunConfig {
        problem: args.problem.problem,
        lambdas: args.lambdas,
        options,
        seed: args.problem.seed,
        trials: args.trials,
        jobs: args.jobs,
    };
    let rows = run_sweep(&scenario, &table, &config)?;
    match args.output {
        Some(path) => emit_results(&rows, args.format, &path),
        None => write_or_print(&render_rows(&rows, args.format), None),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), SolveError> {
    let text = std::fs::read_to_string(&args.scenario).map_err(|e| {
        SolveError::Config(format!("cannot read {}: {e}", args.scenario.display()))
    })?;
    let scenario = load_scenario(&text).map_err(|e| SolveError::Config(e.to_string()))?;
    let report = verify_scenario(&scenario)?;

    let rendered = if args.json {
        to_pretty_json(&report)
    } else {
        let mut out = String::new();
        for check in &report.checks {
            out.push_str(&format!(
                "[{}] {}: max deviation {:.3e} (tolerance {:.0e}) — {}\n",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.max_deviation,
                check.tolerance,
                check.detail
            ));
        }
        out
    };
    write_or_print(&rendered, args.output.as_deref())?;

    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> =
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(SolveError::Solver(format!("self-checks failed: {}", failed.join(", "))))
    }
}

/// What `simulate` prints: the plan it validated and how the simulation
/// compared with the analytic prediction.
#[derive(Serialize)]
struct SimulationSummary {
    problem: ProblemId,
    plan: PlanOutcome,
    simulation: SimReport,
    relative_error: f64,
    within_ci: bool,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), SolveError> {
    let (scenario, table) = load(&args.problem.scenario)?;
    let options = build_options(&args.problem, &table)?;
    let problem = args.problem.problem;
    let outcome = solve_and_round(&scenario, &table, problem, &options)?;

    let sim_options = SimOptions {
        trials: args.trials,
        intervals: args.intervals,
        ..SimOptions::default()
    };
    let mc_seed = mix_seed(args.problem.seed, 1);
    let report = match problem {
        ProblemId::StaticLops => {
            simulate_static_analog(&scenario, &table, &outcome.plan, mc_seed, &sim_options)
        }
        ProblemId::StaticBlops => {
            simulate_static_digital(&scenario, &table, &outcome.plan, mc_seed, &sim_options)
        }
        ProblemId::DynamicLops | ProblemId::MinCostDynamic => simulate_dynamic(
            &scenario,
            &table,
            &outcome.plan,
            Scheme::Analog,
            mc_seed,
            &sim_options,
        ),
        ProblemId::DynamicBlops => simulate_dynamic(
            &scenario,
            &table,
            &outcome.plan,
            Scheme::Digital,
            mc_seed,
            &sim_options,
        ),
        ProblemId::MinCostStatic => {
            let simulate = match options.min_cost_scheme {
                Scheme::Analog => simulate_static_analog,
                Scheme::Digital => simulate_static_digital,
            };
            simulate(&scenario, &table, &outcome.plan, mc_seed, &sim_options)
        }
    }
    .map_err(|e| SolveError::Solver(format!("simulation failed: {e}")))?;

    let summary = SimulationSummary {
        problem,
        relative_error: report.relative_error(),
        within_ci: report.within_ci(),
        simulation: report,
        plan: outcome,
    };
    write_or_print(&to_pretty_json(&summary), args.output.as_deref())
}

fn cmd_dump_links(args: DumpLinksArgs) -> Result<(), SolveError> {
    let (_, table) = load(&args.scenario)?;
    write_or_print(&table.to_csv(), args.output.as_deref())
}
