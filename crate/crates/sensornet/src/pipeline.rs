//! End-to-end runs: solve-and-round, budget sweeps, model self-checks, and
//! result emission.
//!
//! This module is the glue the `sensornet` binary is a thin shell over:
//!
//! * [`solve_and_round`] — one problem, one budget: solve the relaxation,
//!   round to a Boolean plan, price it, and re-verify its feasibility.
//! * [`run_sweep`] — the same across a grid of cost budgets, optionally with
//!   Monte Carlo validation per point, parallelized across points with
//!   deterministic per-point seeds (output order follows the input grid, not
//!   completion order).
//! * [`verify_scenario`] — four structural self-checks of the link and
//!   objective models on a concrete scenario, reported with their maximum
//!   observed deviations.
//! * [`render_rows`] / [`emit_results`] — fixed-schema CSV and JSON output,
//!   byte-stable given identical rows.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::link::{
    quantization_bits, quantization_noise, quantization_var_limit, LinkDims, LinkTable,
};
use crate::lp::{fits, Sense};
use crate::montecarlo::{
    simulate_dynamic, simulate_static_analog, simulate_static_digital, SimOptions,
};
use crate::objective::{
    info_bound_for_error, info_weights, riccati_mmse, steady_state_mmse, weighted_total, Scheme,
    Selection, StaticObjective,
};
use crate::relax::{
    build_polytope, cost_vector, solve, ProblemId, SolveError, SolveOptions, SolveReport,
};
use crate::rounding::{feasibility_check, randomized_round};
use crate::scenario::{Scenario, BOLTZMANN};

/// Fixed header of the CSV result schema.
pub const RESULT_HEADER: &str = "lambda,relaxed,rounded,mc,mc_ci,counts_by_type,counts_by_bw,ms";

// ---------------------------------------------------------------------------
// Sweep configuration and rows
// ---------------------------------------------------------------------------

/// One budget sweep: which problem, over which cost budgets, how to solve
/// each point, and how hard to validate it.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// The budgeted problem swept (min-cost problems have no budget axis
    /// and are rejected).
    pub problem: ProblemId,
    /// Cost budgets, one sweep point each; emitted in this order.
    pub lambdas: Vec<f64>,
    /// Solver options applied at every point; `cost_cap` and `round_seed`
    /// are overridden per point.
    pub options: SolveOptions,
    /// Base seed. Point `i` rounds with a seed mixed from `(seed, i)` —
    /// point 0 uses the seed unchanged, so a one-point sweep reproduces a
    /// direct solve-and-round exactly.
    pub seed: u64,
    /// Monte Carlo trials per point validating the rounded plan; 0 skips
    /// validation and leaves the `mc` columns empty.
    pub trials: usize,
    /// Worker threads for the sweep; 0 uses the default parallelism.
    pub jobs: usize,
}

/// One sweep point. `relaxed`, `rounded`, and `mc` are all estimation
/// errors (posterior trace for static problems, steady-state tracking error
/// for dynamic ones), so a row reads as "bound, plan, reality".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Cost budget of this point.
    pub lambda: f64,
    /// Estimation error of the relaxed (fractional) optimum.
    pub relaxed: f64,
    /// Estimation error of the rounded Boolean plan.
    pub rounded: f64,
    /// Monte Carlo estimate of the rounded plan's error, when requested.
    pub mc: Option<f64>,
    /// Confidence half-width of `mc`.
    pub mc_ci: Option<f64>,
    /// Deployed sensor count per type (types 1.., type 0 means "none").
    pub counts_by_type: Vec<usize>,
    /// Deployed sensor count per bandwidth slot.
    pub counts_by_bw: Vec<usize>,
    /// Wall-clock milliseconds spent on this point.
    pub ms: u64,
}

/// Output encodings for [`render_rows`] and [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Fixed-header CSV, one line per row; optional fields render empty and
    /// count vectors are pipe-separated.
    Csv,
    /// Pretty-printed JSON array with stable key order.
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format '{other}', expected csv or json")),
        }
    }
}

// ---------------------------------------------------------------------------
// Solve-and-round
// ---------------------------------------------------------------------------

/// A solved problem carried all the way to a deployable plan.
#[derive(Debug, Clone, Serialize)]
pub struct PlanOutcome {
    /// The relaxed solve underneath this plan.
    pub report: SolveReport,
    /// The Boolean plan, one `(type, bandwidth)` pair per location.
    pub assignment: Vec<(usize, usize)>,
    /// Estimation error of the Boolean plan.
    pub plan_mmse: f64,
    /// Deployment cost of the Boolean plan.
    pub plan_cost: f64,
    /// Spectrum use of the Boolean plan (channels or hertz, by scheme).
    pub plan_spectrum: f64,
    /// Per-interval information of the Boolean plan (dynamic problems).
    pub plan_info: Option<f64>,
    /// Whether the plan re-verified against its polytope.
    pub feasible: bool,
    /// Constraint violations found on re-verification, if any.
    pub violations: Vec<String>,
    /// The Boolean plan in selection form (not serialized; `assignment` is).
    #[serde(skip)]
    pub plan: Selection,
}

/// Transmission scheme a problem prices its links under.
fn scheme_of(problem: ProblemId, options: &SolveOptions) -> Scheme {
    match problem {
        ProblemId::StaticLops | ProblemId::DynamicLops | ProblemId::MinCostDynamic => {
            Scheme::Analog
        }
        ProblemId::StaticBlops | ProblemId::DynamicBlops => Scheme::Digital,
        ProblemId::MinCostStatic => options.min_cost_scheme,
    }
}

/// Solve a problem and carry the result to a Boolean plan.
///
/// Budget problems round the fractional solution toward their own
/// objective (minimum trace, maximum information). The static min-cost
/// solver already returns a Boolean certificate, which is passed through.
/// The dynamic min-cost LP solution is rounded toward minimum cost with a
/// hard preference for draws that still meet the information floor; if no
/// draw does, the run reports infeasibility rather than an undershooting
/// plan. The plan is re-verified against its polytope before returning.
pub fn solve_and_round(
    scenario: &Scenario,
    table: &LinkTable,
    problem: ProblemId,
    options: &SolveOptions,
) -> Result<PlanOutcome, SolveError> {
    let report = solve(scenario, table, problem, options)?;
    let scheme = scheme_of(problem, options);
    let dims = table.dims;

    // Min-cost problems have no cost cap of their own; verify and price the
    // plan inside a polytope whose cost cap nothing can exceed.
    let mut polytope_options = options.clone();
    if problem.is_min_cost() {
        let catalog_max =
            scenario.sensor_types.iter().map(|t| t.cost).fold(0.0, f64::max);
        polytope_options.cost_cap = Some(catalog_max * dims.locations as f64);
    }
    let polytope = build_polytope(scenario, dims, scheme, &polytope_options)?;

    let round = |objective: &dyn Fn(&Selection) -> f64,
                 sense: Sense|
     -> Result<Selection, SolveError> {
        randomized_round(
            &report.relaxed_selection,
            &polytope,
            objective,
            sense,
            options.round_draws,
            options.round_seed,
        )
        .map(|outcome| outcome.selection)
        .map_err(|e| SolveError::Solver(format!("rounding failed: {e}")))
    };

    let mut plan_info = None;
    let (plan, plan_mmse) = match problem {
        ProblemId::StaticLops | ProblemId::StaticBlops => {
            let objective = StaticObjective::new(scenario, table, scheme)
                .map_err(|e| SolveError::Config(e.to_string()))?;
            let plan = round(&|s| objective.value(s), Sense::Minimize)?;
            let mmse = objective.value(&plan);
            (plan, mmse)
        }
        ProblemId::DynamicLops | ProblemId::DynamicBlops => {
            let gamma =
                info_weights(table, scheme).map_err(|e| SolveError::Config(e.to_string()))?;
            let plan = round(&|s| weighted_total(s, &gamma), Sense::Maximize)?;
            let info = weighted_total(&plan, &gamma);
            let prior = &scenario.dynamic_prior;
            plan_info = Some(info);
            (plan, steady_state_mmse(info, prior.a, prior.drive_var))
        }
        ProblemId::MinCostStatic => {
            // The solver's certificate is already Boolean.
            (report.relaxed_selection.clone(), report.mmse)
        }
        ProblemId::MinCostDynamic => {
            let target = options
                .error_target
                .expect("the solver validated the target's presence");
            let prior = &scenario.dynamic_prior;
            let floor = info_bound_for_error(target, prior.a, prior.drive_var)
                .map_err(|e| SolveError::Config(e.to_string()))?;
            let gamma = info_weights(table, Scheme::Analog)
                .map_err(|e| SolveError::Config(e.to_string()))?;
            let costs = cost_vector(scenario, dims);
            // Any floor-meeting draw must beat every floor-missing one, so
            // missing the floor costs more than the whole catalog.
            let penalty = 1.0
                + weighted_total(&Selection::uniform(dims), &costs).max(1.0)
                    * dims.cells() as f64;
            let plan = round(
                &|s| {
                    let cost = weighted_total(s, &costs);
                    if fits(floor, weighted_total(s, &gamma)) {
                        cost
                    } else {
                        penalty + cost
                    }
                },
                Sense::Minimize,
            )?;
            let info = weighted_total(&plan, &gamma);
            if !fits(floor, info) {
                return Err(SolveError::Infeasible(format!(
                    "no rounded plan reached the information floor {floor:.6} \
                     (best draw delivered {info:.6}); the relaxed plan meets it only fractionally"
                )));
            }
            plan_info = Some(info);
            (plan, steady_state_mmse(info, prior.a, prior.drive_var))
        }
    };

    let verdict = feasibility_check(&plan, &polytope, 1e-9);
    Ok(PlanOutcome {
        report,
        assignment: plan.assignment().ok_or_else(|| {
            SolveError::Solver("rounding produced a non-Boolean plan".into())
        })?,
        plan_mmse,
        plan_cost: polytope.cost_of(&plan),
        plan_spectrum: polytope.resource_of(&plan),
        plan_info,
        feasible: verdict.feasible,
        violations: verdict.violations,
        plan,
    })
}

// ---------------------------------------------------------------------------
// Budget sweep
// ---------------------------------------------------------------------------

/// SplitMix-style seed scrambling for per-point seeds: a sweep point `i`
/// rounds with `mix_seed(seed, 2i)` and simulates with `mix_seed(seed, 2i+1)`.
/// Index 0 passes the seed through so a one-point sweep equals a direct run.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    if index == 0 {
        return seed;
    }
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deployed-sensor counts per type (1..) and per bandwidth slot.
fn deployment_counts(assignment: &[(usize, usize)], dims: LinkDims) -> (Vec<usize>, Vec<usize>) {
    let mut by_type = vec![0usize; dims.types.saturating_sub(1)];
    let mut by_bw = vec![0usize; dims.bands];
    for &(k, b) in assignment {
        if k >= 1 {
            by_type[k - 1] += 1;
            by_bw[b] += 1;
        }
    }
    (by_type, by_bw)
}

fn sweep_point(
    scenario: &Scenario,
    table: &LinkTable,
    config: &RunConfig,
    index: usize,
    lambda: f64,
) -> Result<ResultRow, SolveError> {
    let start = Instant::now();
    let mut options = config.options.clone();
    options.cost_cap = Some(lambda);
    options.round_seed = mix_seed(config.seed, 2 * index as u64);

    let outcome = solve_and_round(scenario, table, config.problem, &options)?;

    let (mc, mc_ci) = if config.trials > 0 {
        let mc_seed = mix_seed(config.seed, 2 * index as u64 + 1);
        let sim_options = SimOptions { trials: config.trials, ..SimOptions::default() };
        let sim = match config.problem {
            ProblemId::StaticLops => {
                simulate_static_analog(scenario, table, &outcome.plan, mc_seed, &sim_options)
            }
            ProblemId::StaticBlops => {
                simulate_static_digital(scenario, table, &outcome.plan, mc_seed, &sim_options)
            }
            ProblemId::DynamicLops => simulate_dynamic(
                scenario,
                table,
                &outcome.plan,
                Scheme::Analog,
                mc_seed,
                &sim_options,
            ),
            ProblemId::DynamicBlops => simulate_dynamic(
                scenario,
                table,
                &outcome.plan,
                Scheme::Digital,
                mc_seed,
                &sim_options,
            ),
            ProblemId::MinCostStatic | ProblemId::MinCostDynamic => {
                unreachable!("run_sweep rejects min-cost problems")
            }
        }
        .map_err(|e| SolveError::Solver(format!("validation failed: {e}")))?;
        let ci = sim.ci_halfwidth.is_finite().then_some(sim.ci_halfwidth);
        (Some(sim.empirical_mse), ci)
    } else {
        (None, None)
    };

    let (counts_by_type, counts_by_bw) = deployment_counts(&outcome.assignment, table.dims);
    Ok(ResultRow {
        lambda,
        relaxed: outcome.report.mmse,
        rounded: outcome.plan_mmse,
        mc,
        mc_ci,
        counts_by_type,
        counts_by_bw,
        ms: start.elapsed().as_millis() as u64,
    })
}

/// Sweep a budgeted problem across `config.lambdas`. Points run in parallel
/// up to `config.jobs` workers; rows come back in grid order and every
/// number in them is deterministic given the seed (only `ms` varies).
pub fn run_sweep(
    scenario: &Scenario,
    table: &LinkTable,
    config: &RunConfig,
) -> Result<Vec<ResultRow>, SolveError> {
    if config.problem.is_min_cost() {
        return Err(SolveError::Config(
            "the sweep varies the cost budget; min-cost problems have no budget to sweep — \
             run solve with an error target instead"
                .into(),
        ));
    }
    if config.lambdas.is_empty() {
        return Err(SolveError::Config("the sweep needs at least one budget point".into()));
    }
    for &lambda in &config.lambdas {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(SolveError::Config(format!(
                "budget points must be finite and >= 0, got {lambda}"
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| SolveError::Solver(format!("worker pool: {e}")))?;
    pool.install(|| {
        config
            .lambdas
            .par_iter()
            .enumerate()
            .map(|(i, &lambda)| sweep_point(scenario, table, config, i, lambda))
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Result emission
// ---------------------------------------------------------------------------

fn csv_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_counts(counts: &[usize]) -> String {
    counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|")
}

/// Render rows in the fixed schema. CSV uses [`RESULT_HEADER`], empty
/// fields for skipped Monte Carlo columns, and `|`-separated counts; JSON
/// is a pretty-printed array with key order matching the CSV columns. Both
/// end with a newline and are byte-stable given identical rows.
pub fn render_rows(rows: &[ResultRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(RESULT_HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.lambda,
                    row.relaxed,
                    row.rounded,
                    csv_opt(row.mc),
                    csv_opt(row.mc_ci),
                    csv_counts(&row.counts_by_type),
                    csv_counts(&row.counts_by_bw),
                    row.ms
                ));
            }
            out
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_string_pretty(rows)
                .expect("result rows always serialize: no maps, no non-finite floats");
            out.push('\n');
            out
        }
    }
}

/// Write rendered rows to `path`. Rejects an empty row set (a sweep that
/// produced nothing is a bug upstream, not an output).
pub fn emit_results(
    rows: &[ResultRow],
    format: OutputFormat,
    path: &Path,
) -> Result<(), SolveError> {
    if rows.is_empty() {
        return Err(SolveError::Config("refusing to emit an empty result set".into()));
    }
    std::fs::write(path, render_rows(rows, format))
        .map_err(|e| SolveError::Config(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Catalog restrictions
// ---------------------------------------------------------------------------

/// Build a cell mask that restricts deployment to one sensor type and/or
/// one bandwidth slot, always keeping the "deploy nothing" cell available.
/// `keep_type == Some(0)` legitimately forbids all deployment.
pub fn restriction_mask(
    dims: LinkDims,
    keep_type: Option<usize>,
    keep_band: Option<usize>,
) -> Result<Vec<bool>, SolveError> {
    if let Some(t) = keep_type {
        if t >= dims.types {
            return Err(SolveError::Config(format!(
                "type restriction {t} is out of range (catalog has types 0..{})",
                dims.types - 1
            )));
        }
    }
    if let Some(b) = keep_band {
        if b >= dims.bands {
            return Err(SolveError::Config(format!(
                "bandwidth restriction {b} is out of range (catalog has slots 0..{})",
                dims.bands - 1
            )));
        }
    }
    let mut mask = vec![false; dims.types * dims.bands];
    mask[0] = true; // the empty cell stays available
    for k in 1..dims.types {
        if keep_type.is_some_and(|t| k != t) {
            continue;
        }
        for b in 0..dims.bands {
            if keep_band.is_some_and(|keep| b != keep) {
                continue;
            }
            mask[k * dims.bands + b] = true;
        }
    }
    Ok(mask)
}

// ---------------------------------------------------------------------------
// Scenario self-checks
// ---------------------------------------------------------------------------

/// One structural self-check of the model on a concrete scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyCheck {
    /// Stable check identifier.
    pub name: &'static str,
    /// Whether the maximum deviation stayed within tolerance.
    pub passed: bool,
    /// Largest relative deviation observed.
    pub max_deviation: f64,
    /// The tolerance the deviation was held against.
    pub tolerance: f64,
    /// What was compared, and how much of it.
    pub detail: String,
}

/// The four model self-checks of [`verify_scenario`].
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    /// Individual checks, in a fixed order.
    pub checks: Vec<ConsistencyCheck>,
}

impl ConsistencyReport {
    /// Whether every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Relative deviation of `b` from `a`, safe at zero.
fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Run the four structural self-checks on a scenario:
///
/// 1. **snr-grid-independence** — per-channel SNR must depend on the grid
///    only through the total channel count, not the time/frequency split.
/// 2. **analog-copy-invariance** — duplicating an analog transmission over
///    several channels with the energy split between them leaves the
///    combined effective noise exactly where single-channel forwarding puts
///    it.
/// 3. **kalman-equivalence** — the closed-form steady-state tracking error
///    satisfies its own fixed-point equation and agrees with the iterated
///    Riccati recursion at information levels drawn from this scenario.
/// 4. **quantization-limit** — the digital quantization noise at an
///    enormous per-sensor bandwidth matches its closed-form limit.
///
/// Failures are report content, not errors; only an unbuildable scenario
/// returns `Err`.
pub fn verify_scenario(scenario: &Scenario) -> Result<ConsistencyReport, SolveError> {
    let table =
        LinkTable::build(scenario).map_err(|e| SolveError::Config(e.to_string()))?;
    Ok(ConsistencyReport {
        checks: vec![
            check_grid_independence(scenario, &table)?,
            check_copy_invariance(scenario, &table),
            check_kalman_equivalence(scenario, &table),
            check_quantization_limit(scenario, &table),
        ],
    })
}

fn check_grid_independence(
    scenario: &Scenario,
    base: &LinkTable,
) -> Result<ConsistencyCheck, SolveError> {
    let n = scenario.grid.time_channels as u64 * scenario.grid.freq_channels as u64;
    let mut splits = Vec::new();
    let mut d = 1u64;
    while d * d <= n && d <= 100_000 && splits.len() < 64 {
        if n % d == 0 {
            splits.push((d, n / d));
            if d != n / d {
                splits.push((n / d, d));
            }
        }
        d += 1;
    }
    splits.retain(|&(t, f)| t <= u32::MAX as u64 && f <= u32::MAX as u64);

    let mut max_dev = 0.0f64;
    for &(t, f) in &splits {
        let mut alt = scenario.clone();
        alt.grid.time_channels = t as u32;
        alt.grid.freq_channels = f as u32;
        let table =
            LinkTable::build(&alt).map_err(|e| SolveError::Config(e.to_string()))?;
        for (&s0, &s1) in base.snrs.iter().zip(&table.snrs) {
            max_dev = max_dev.max(rel_dev(s0, s1));
        }
    }
    let tolerance = 1e-12;
    Ok(ConsistencyCheck {
        name: "snr-grid-independence",
        passed: max_dev <= tolerance,
        max_deviation: max_dev,
        tolerance,
        detail: format!(
            "per-channel snr compared across {} time/frequency splits of {} channels",
            splits.len(),
            n
        ),
    })
}

fn check_copy_invariance(scenario: &Scenario, table: &LinkTable) -> ConsistencyCheck {
    const COPIES: [u32; 5] = [1, 2, 5, 10, 50];
    let dims = table.dims;
    let time_channels = scenario.grid.time_channels as f64;
    let mut max_dev = 0.0f64;
    let mut cells = 0usize;
    for l in 0..dims.locations {
        for k in 1..dims.types {
            let single = table.analog_vars[dims.idx(l, k, 0)];
            if !single.is_finite() {
                continue; // the link cannot close under any copy count either
            }
            cells += 1;
            let energy = table.node_powers[l * dims.types + k] * time_channels;
            let g = table.channel_gains[l];
            for copies in COPIES {
                // The interval's energy splits across the copies; combining
                // the copies multiplies the effective power back.
                let per_copy = energy / copies as f64;
                let combined = table.measurement_var
                    + table.signal_vars[l] * table.receiver_noise
                        / (g * per_copy * copies as f64);
                max_dev = max_dev.max(rel_dev(single, combined));
            }
        }
    }
    let tolerance = 1e-12;
    ConsistencyCheck {
        name: "analog-copy-invariance",
        passed: max_dev <= tolerance,
        max_deviation: max_dev,
        tolerance,
        detail: format!(
            "analog effective noise compared against energy-split duplicates over \
             {:?} channels on {cells} transmitting cells",
            COPIES
        ),
    }
}

fn check_kalman_equivalence(scenario: &Scenario, table: &LinkTable) -> ConsistencyCheck {
    let prior = &scenario.dynamic_prior;
    let (a, drive_var) = (prior.a, prior.drive_var);
    let dims = table.dims;

    // Information levels this scenario can actually produce (first source):
    // nothing, the single best cell, and a full best-per-location deployment,
    // under both schemes.
    let mut infos = vec![0.0];
    for vars in [&table.analog_vars, &table.digital_vars] {
        let mut best_single = 0.0f64;
        let mut best_total = 0.0f64;
        for l in 0..dims.locations {
            let h = table.measurement_gains[l * table.sources];
            let mut best_here = 0.0f64;
            for k in 1..dims.types {
                for b in 0..dims.bands {
                    let v = vars[dims.idx(l, k, b)];
                    if v.is_finite() {
                        best_here = best_here.max(h * h / v);
                    }
                }
            }
            best_single = best_single.max(best_here);
            best_total += best_here;
        }
        infos.push(best_single);
        infos.push(best_total);
    }

    let mut max_dev = 0.0f64;
    for &info in &infos {
        let m = steady_state_mmse(info, a, drive_var);
        let scale = 1.0 + m.abs();
        // Fixed point: one predict-update turn must map M onto itself.
        let mapped = 1.0 / (1.0 / (a * a * m + drive_var) + info);
        max_dev = max_dev.max((mapped - m).abs() / scale);
        let (iterated, _) = riccati_mmse(info, a, drive_var, 1e-13, 100_000);
        max_dev = max_dev.max((iterated - m).abs() / scale);
    }
    let tolerance = 1e-8;
    ConsistencyCheck {
        name: "kalman-equivalence",
        passed: max_dev <= tolerance,
        max_deviation: max_dev,
        tolerance,
        detail: format!(
            "closed-form steady-state error checked as a fixed point and against the \
             Riccati recursion at {} information levels",
            infos.len()
        ),
    }
}

fn check_quantization_limit(scenario: &Scenario, table: &LinkTable) -> ConsistencyCheck {
    const HUGE_BANDWIDTH_HZ: f64 = 1e12;
    let dims = table.dims;
    let n = scenario.grid.time_channels as u64 * scenario.grid.freq_channels as u64;
    let total_bandwidth = scenario.grid.bandwidth;
    let kdw = BOLTZMANN * scenario.noise.temperature * total_bandwidth;
    let floor_channels = HUGE_BANDWIDTH_HZ * n as f64 / total_bandwidth;
    let time_channels = scenario.grid.time_channels as f64;

    let mut max_dev = 0.0f64;
    let mut cells = 0usize;
    for l in 0..dims.locations {
        for k in 1..dims.types {
            let p = table.node_powers[l * dims.types + k];
            let g = table.channel_gains[l];
            let sigma_x2 = table.signal_vars[l];

            // The finite-slice noise approaches the limit with a first-order
            // error of exponent²/channels, so widen the slice — never below
            // the nominal huge one — until that error sits around 1e-10
            // (links whose noise underflows on both sides are compared at
            // zero regardless of the slice width).
            let exponent = p * g * n as f64 / kdw;
            let huge_channels =
                floor_channels.max(exponent * exponent * 1e10).min(4.0e15) as u64;

            let p_hat = p * time_channels / huge_channels as f64;
            let snr = p_hat * g / table.receiver_noise;
            let at_huge =
                quantization_noise(sigma_x2, quantization_bits(snr, huge_channels));
            let (limit, _saturated) = quantization_var_limit(sigma_x2, p, g, n, kdw);

            cells += 1;
            if limit > 0.0 || at_huge > 0.0 {
                max_dev = max_dev.max(rel_dev(at_huge, limit));
            }
        }
    }
    let tolerance = 1e-6;
    ConsistencyCheck {
        name: "quantization-limit",
        passed: max_dev <= tolerance,
        max_deviation: max_dev,
        tolerance,
        detail: format!(
            "quantization noise over a bandwidth slice of at least {HUGE_BANDWIDTH_HZ:.0e} Hz \
             compared with its closed-form limit on {cells} transmitting cells"
        ),
    }
}
