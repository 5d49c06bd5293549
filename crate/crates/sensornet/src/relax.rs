//! Relaxed planning problems and their solvers.
//!
//! Each Boolean deployment problem — pick one `(type, bandwidth)` cell per
//! location under cost and spectrum budgets — is relaxed to its convex hull:
//! the selection polytope of [`crate::lp`]. This module solves the relaxed
//! problems and reports a *certified* bound alongside the plan it returns:
//!
//! * **Static problems** minimize the posterior trace with a Frank–Wolfe
//!   loop ([`frank_wolfe`]) over the polytope, using the LP solver as the
//!   linear-minimization oracle. The certificate is the Frank–Wolfe duality
//!   gap.
//! * **Dynamic problems** maximize the total per-interval information, which
//!   is linear, so a single LP call solves them; the certificate is the LP
//!   dual bound.
//! * **Cost minimization** inverts those solvers: the dynamic variant is
//!   again a single LP (minimum cost subject to an information floor), while
//!   the static variant bisects on the cost budget and certifies feasibility
//!   by actually rounding the relaxed plan to a Boolean one that meets the
//!   error target.
//!
//! Every solve is deterministic: same scenario, same options, same result.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::link::{LinkDims, LinkTable};
use crate::lp::{fits, solve_lp, LpError, LpStatus, SelectionPolytope, Sense};
use crate::objective::{
    info_bound_for_error, info_weights, steady_state_mmse, Scheme, Selection, StaticObjective,
};
use crate::rounding::{randomized_round, DEFAULT_DRAWS};
use crate::scenario::Scenario;

/// Default iteration cap for the Frank–Wolfe loop.
pub const DEFAULT_MAX_ITER: usize = 20_000;
/// Default bisection depth for the exact line search.
pub const DEFAULT_LINE_SEARCH_STEPS: usize = 50;
/// Default bisection depth for the cost-minimization budget search.
pub const DEFAULT_BISECTION_STEPS: usize = 40;
/// Default pivot tolerance handed to the LP solver.
pub const DEFAULT_LP_TOL: f64 = 1e-9;
/// Active-set size above which the Frank–Wolfe bookkeeping is collapsed.
const MAX_ATOMS: usize = 1000;

// ---------------------------------------------------------------------------
// Problem identifiers
// ---------------------------------------------------------------------------

/// The six planning problems.
///
/// "LoPS" problems jointly pick location and power class for the analog
/// transmission scheme, where every sensor occupies exactly one channel and
/// the spectrum budget caps the *channel count*. "BLoPS" problems add the
/// bandwidth choice for the digital scheme, where the spectrum budget caps
/// the *total occupied bandwidth* in hertz. The min-cost variants flip a
/// problem around: minimize deployment cost subject to an estimation-error
/// ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProblemId {
    /// Static vector source, analog scheme, channel-count budget.
    #[serde(rename = "StaticLoPS")]
    StaticLops,
    /// Static vector source, digital scheme, bandwidth budget.
    #[serde(rename = "StaticBLoPS")]
    StaticBlops,
    /// Scalar tracked source, analog scheme, channel-count budget.
    #[serde(rename = "DynamicLoPS")]
    DynamicLops,
    /// Scalar tracked source, digital scheme, bandwidth budget.
    #[serde(rename = "DynamicBLoPS")]
    DynamicBlops,
    /// Minimum deployment cost meeting a static-error target.
    MinCostStatic,
    /// Minimum deployment cost meeting a tracking-error target.
    MinCostDynamic,
}

impl ProblemId {
    /// Every problem, in the order they are documented.
    pub const ALL: [ProblemId; 6] = [
        ProblemId::StaticLops,
        ProblemId::StaticBlops,
        ProblemId::DynamicLops,
        ProblemId::DynamicBlops,
        ProblemId::MinCostStatic,
        ProblemId::MinCostDynamic,
    ];

    /// The command-line token naming this problem.
    pub fn token(self) -> &'static str {
        match self {
            ProblemId::StaticLops => "static-lops",
            ProblemId::StaticBlops => "static-blops",
            ProblemId::DynamicLops => "dynamic-lops",
            ProblemId::DynamicBlops => "dynamic-blops",
            ProblemId::MinCostStatic => "min-cost-static",
            ProblemId::MinCostDynamic => "min-cost-dynamic",
        }
    }

    /// Whether this problem minimizes cost subject to an error target
    /// (and therefore needs `error_target` in [`SolveOptions`]).
    pub fn is_min_cost(self) -> bool {
        matches!(self, ProblemId::MinCostStatic | ProblemId::MinCostDynamic)
    }

    /// Whether this problem tracks the scalar dynamic source.
    pub fn is_dynamic(self) -> bool {
        matches!(
            self,
            ProblemId::DynamicLops | ProblemId::DynamicBlops | ProblemId::MinCostDynamic
        )
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ProblemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|p| p.token() == lower)
            .ok_or_else(|| {
                let tokens: Vec<&str> = ProblemId::ALL.iter().map(|p| p.token()).collect();
                format!("unknown problem '{s}', expected one of: {}", tokens.join(", "))
            })
    }
}

// ---------------------------------------------------------------------------
// Errors and options
// ---------------------------------------------------------------------------

/// Failure modes of a solve, each mapped to a process exit code by the CLI.
#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    /// The problem has no feasible plan (e.g. an error target below what
    /// even the full budget achieves).
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// The numerical machinery failed (LP stall, inconsistent solution).
    #[error("solver failure: {0}")]
    Solver(String),
    /// The request itself is invalid (bad mask, missing target, bad caps).
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl SolveError {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolveError::Infeasible(_) => 2,
            SolveError::Solver(_) => 3,
            SolveError::Config(_) => 4,
        }
    }
}

impl From<LpError> for SolveError {
    fn from(err: LpError) -> Self {
        match err {
            LpError::Shape(msg) => SolveError::Config(msg),
            LpError::Stalled(msg) => SolveError::Solver(msg),
        }
    }
}

/// Knobs shared by every solver. `Default` gives the documented defaults;
/// budget overrides fall back to the scenario's own budgets.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Frank–Wolfe duality-gap target. `None` means `1e-6` times the prior
    /// trace, so the default scales with the problem.
    pub fw_tol: Option<f64>,
    /// Frank–Wolfe iteration cap; hitting it returns the best iterate with
    /// its gap reported rather than failing.
    pub max_iter: usize,
    /// Bisection depth of the exact line search inside Frank–Wolfe.
    pub line_search_steps: usize,
    /// Bisection depth of the cost-minimization budget search.
    pub bisection_steps: usize,
    /// Pivot tolerance handed to the LP solver.
    pub lp_tol: f64,
    /// Cost budget override; `None` uses the scenario's. Ignored by the
    /// min-cost problems, where cost is the objective.
    pub cost_cap: Option<f64>,
    /// Spectrum budget override; `None` uses the scenario's. Counts channels
    /// for analog problems and hertz for digital ones.
    pub spectrum_cap: Option<f64>,
    /// Per-`(type, bandwidth)` availability mask (`types * bands` entries,
    /// `true` keeps a cell). Must keep the empty cell `(0, 0)` available.
    pub cell_mask: Option<Vec<bool>>,
    /// Estimation-error target for the min-cost problems.
    pub error_target: Option<f64>,
    /// Transmission scheme the static min-cost bisection optimizes under.
    pub min_cost_scheme: Scheme,
    /// Seed of the rounding pass that certifies min-cost feasibility.
    pub round_seed: u64,
    /// Randomized draws per rounding round in the min-cost certification.
    pub round_draws: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            fw_tol: None,
            max_iter: DEFAULT_MAX_ITER,
            line_search_steps: DEFAULT_LINE_SEARCH_STEPS,
            bisection_steps: DEFAULT_BISECTION_STEPS,
            lp_tol: DEFAULT_LP_TOL,
            cost_cap: None,
            spectrum_cap: None,
            cell_mask: None,
            error_target: None,
            min_cost_scheme: Scheme::Analog,
            round_seed: 0,
            round_draws: DEFAULT_DRAWS,
        }
    }
}

/// What a solve returns. Field meaning varies slightly by problem family;
/// each field documents the variation.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Which problem was solved.
    pub problem_id: ProblemId,
    /// The returned plan: fractional for the budget problems and the
    /// dynamic min-cost LP, Boolean for the static min-cost bisection
    /// (whose answer is the certifying deployment itself).
    pub relaxed_selection: Selection,
    /// Certified bound on the *Boolean* optimum: a lower bound on the
    /// achievable trace (static), an upper bound on the achievable
    /// information (dynamic), or a lower bound on the achievable cost
    /// (min-cost). Valid regardless of how early the solver stopped.
    pub relaxed_value: f64,
    /// Objective of `relaxed_selection`, in the same units as
    /// `relaxed_value` (trace, information, or cost).
    pub achieved_value: f64,
    /// Estimation error of `relaxed_selection`: the posterior trace for
    /// static problems, the steady-state tracking error for dynamic ones.
    pub mmse: f64,
    /// Total per-interval information of the plan (dynamic problems only).
    pub info_value: Option<f64>,
    /// Frank–Wolfe duality gap at termination (static budget problems only).
    pub fw_gap: Option<f64>,
    /// Deployment cost of the returned plan (min-cost problems only).
    pub min_cost: Option<f64>,
    /// Solver iterations, summed over inner solves where applicable.
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// Frank–Wolfe
// ---------------------------------------------------------------------------

/// Result of a [`frank_wolfe`] run.
#[derive(Debug, Clone)]
pub struct FwOutcome {
    /// Final iterate.
    pub x: Vec<f64>,
    /// Objective value at the final iterate.
    pub value: f64,
    /// Frank–Wolfe duality gap at the final iterate; `f(x) - f* <= gap`.
    pub gap: f64,
    /// Iterations performed.
    pub iterations: usize,
}

/// Minimize a smooth convex `f` over a polytope given by its
/// linear-minimization oracle `lmo`, which must return a feasible point
/// minimizing the inner product with the supplied direction.
///
/// Classic Frank–Wolfe steps are augmented with away steps over the active
/// vertex set, and every step length comes from a bisection line search on
/// the directional derivative, so the value sequence never increases. The
/// loop stops when the duality gap `⟨∇f(x), x − v⟩` drops to `tol` or after
/// `max_iter` iterations, whichever comes first; the reported gap is always
/// valid for the returned iterate, so `f(x) − gap` lower-bounds the optimum
/// even on early exit.
pub fn frank_wolfe<E>(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    lmo: impl Fn(&[f64]) -> Result<Vec<f64>, E>,
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    line_search_steps: usize,
) -> Result<FwOutcome, E> {
    let n = x0.len();
    let mut x = x0.clone();
    let mut atoms: Vec<(Vec<f64>, f64)> = vec![(x0, 1.0)];
    let mut value = f(&x);
    let mut gap;
    let mut iterations = 0;

    loop {
        let g = grad(&x);
        let vertex = lmo(&g)?;
        let gx = dot(&g, &x);
        gap = gx - dot(&g, &vertex);
        if gap <= tol || iterations >= max_iter {
            break;
        }

        // Away candidate: the active atom most aligned with the gradient.
        let (away_idx, away_gain) = atoms
            .iter()
            .enumerate()
            .map(|(i, (a, _))| (i, dot(&g, a) - gx))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set is never empty");

        // Pick the steeper descent: toward the new vertex or away from the
        // worst atom. Both slopes are nonnegative; the forward slope equals
        // the gap, which exceeds tol here, so some progress is possible.
        let (direction, t_max, away) = if gap >= away_gain {
            let d: Vec<f64> = vertex.iter().zip(&x).map(|(v, xi)| v - xi).collect();
            (d, 1.0, None)
        } else {
            let (atom, weight) = &atoms[away_idx];
            let d: Vec<f64> = x.iter().zip(atom).map(|(xi, a)| xi - a).collect();
            let t_max = (weight / (1.0 - weight).max(1e-12)).min(1e8);
            (d, t_max, Some(away_idx))
        };

        let slope = |t: f64| -> f64 {
            let xt: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + t * di).collect();
            dot(&grad(&xt), &direction)
        };
        let step = line_search(&slope, t_max, line_search_steps);
        if step <= 0.0 {
            break; // no measurable descent along the chosen direction
        }

        let candidate: Vec<f64> =
            x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
        let candidate_value = f(&candidate);
        if candidate_value > value + 1e-12 * (1.0 + value.abs()) {
            break; // numeric floor reached; keep the current iterate
        }

        match away {
            None => {
                if step >= 1.0 - 1e-12 {
                    atoms.clear();
                    atoms.push((vertex, 1.0));
                } else {
                    for (_, w) in atoms.iter_mut() {
                        *w *= 1.0 - step;
                    }
                    match atoms.iter().position(|(a, _)| a == &vertex) {
                        Some(i) => atoms[i].1 += step,
                        None => atoms.push((vertex, step)),
                    }
                }
            }
            Some(idx) => {
                for (_, w) in atoms.iter_mut() {
                    *w *= 1.0 + step;
                }
                atoms[idx].1 -= step;
                atoms.retain(|(_, w)| *w > 1e-12);
            }
        }
        if atoms.len() > MAX_ATOMS {
            atoms.clear();
            atoms.push((candidate.clone(), 1.0));
        }

        // Rebuild the iterate from the atom decomposition to stop weight
        // drift from accumulating over many steps.
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        let mut rebuilt = vec![0.0; n];
        for (atom, w) in &atoms {
            for (r, a) in rebuilt.iter_mut().zip(atom) {
                *r += w / total * a;
            }
        }
        x = rebuilt;
        value = f(&x);
        iterations += 1;
    }

    Ok(FwOutcome { x, value, gap, iterations })
}

/// Largest step in `[0, t_max]` with a nonpositive directional derivative,
/// found by bisection on the (nondecreasing, by convexity) slope.
fn line_search(slope: &impl Fn(f64) -> f64, t_max: f64, steps: usize) -> f64 {
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    if slope(t_max) <= 0.0 {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Polytope assembly
// ---------------------------------------------------------------------------

/// Per-cell deployment cost: the catalog cost of the cell's type, repeated
/// across bandwidths (the empty type costs nothing by construction).
pub fn cost_vector(scenario: &Scenario, dims: LinkDims) -> Vec<f64> {
    let mut costs = vec![0.0; dims.cells()];
    for l in 0..dims.locations {
        for k in 0..dims.types {
            for b in 0..dims.bands {
                costs[dims.idx(l, k, b)] = scenario.sensor_types[k].cost;
            }
        }
    }
    costs
}

/// Per-cell spectrum use: one channel per deployed sensor under the analog
/// scheme, the cell's bandwidth in hertz under the digital scheme; zero for
/// the empty type either way.
pub fn spectrum_vector(scenario: &Scenario, dims: LinkDims, scheme: Scheme) -> Vec<f64> {
    let mut spectrum = vec![0.0; dims.cells()];
    for l in 0..dims.locations {
        for k in 1..dims.types {
            for b in 0..dims.bands {
                spectrum[dims.idx(l, k, b)] = match scheme {
                    Scheme::Analog => 1.0,
                    Scheme::Digital => scenario.bandwidths[b].hz,
                };
            }
        }
    }
    spectrum
}

/// Build the feasible set of a budgeted problem: budgets from the scenario
/// (or the options' overrides), the scheme's spectrum accounting, and a cell
/// mask combining three restrictions — the empty type lives only in
/// bandwidth slot 0 (its other copies are redundant), analog problems pin
/// every sensor to bandwidth slot 0 (one channel each, so the bandwidth
/// choice is moot), and the caller's own mask.
pub fn build_polytope(
    scenario: &Scenario,
    dims: LinkDims,
    scheme: Scheme,
    options: &SolveOptions,
) -> Result<SelectionPolytope, SolveError> {
    let per_loc = dims.types * dims.bands;
    if let Some(mask) = &options.cell_mask {
        if mask.len() != per_loc {
            return Err(SolveError::Config(format!(
                "cell mask has {} entries, expected types * bands = {}",
                mask.len(),
                per_loc
            )));
        }
    }
    let mut pattern = vec![false; per_loc];
    for k in 0..dims.types {
        for b in 0..dims.bands {
            let mut ok = if k == 0 { b == 0 } else { true };
            if scheme == Scheme::Analog && k >= 1 {
                ok &= b == 0;
            }
            if let Some(mask) = &options.cell_mask {
                ok &= mask[k * dims.bands + b];
            }
            pattern[k * dims.bands + b] = ok;
        }
    }
    if !pattern[0] {
        return Err(SolveError::Config(
            "the cell mask must keep the empty assignment (type 0, bandwidth slot 0) available"
                .into(),
        ));
    }

    let cost_cap = options.cost_cap.unwrap_or(scenario.budgets.cost);
    let spectrum_cap = options.spectrum_cap.unwrap_or(match scheme {
        Scheme::Analog => scenario.budgets.channels as f64,
        Scheme::Digital => scenario.budgets.bandwidth,
    });
    for (name, cap) in [("cost", cost_cap), ("spectrum", spectrum_cap)] {
        if !cap.is_finite() || cap < 0.0 {
            return Err(SolveError::Config(format!("{name} budget must be finite and >= 0, got {cap}")));
        }
    }

    Ok(SelectionPolytope::new(
        dims,
        cost_vector(scenario, dims),
        cost_cap,
        spectrum_vector(scenario, dims, scheme),
        spectrum_cap,
        Some(&pattern),
    ))
}

/// Deterministic start: spread each location's weight uniformly over its
/// allowed cells, then blend toward the all-empty plan just enough to fit
/// both budgets.
pub fn uniform_start(polytope: &SelectionPolytope) -> Selection {
    let dims = polytope.dims;
    let per_loc = dims.types * dims.bands;
    let mut weights = vec![0.0; dims.cells()];
    for l in 0..dims.locations {
        let allowed: Vec<usize> = (0..per_loc)
            .map(|c| l * per_loc + c)
            .filter(|&idx| polytope.cell_allowed(idx))
            .collect();
        for &idx in &allowed {
            weights[idx] = 1.0 / allowed.len() as f64;
        }
    }
    let uniform = Selection { dims, weights };
    let mut t: f64 = 1.0;
    for (total, cap) in [
        (polytope.cost_of(&uniform), polytope.cost_cap),
        (polytope.resource_of(&uniform), polytope.resource_cap),
    ] {
        if !fits(total, cap) {
            t = t.min(cap / total);
        }
    }
    let mut blended = uniform;
    for w in blended.weights.iter_mut() {
        *w *= t;
    }
    for l in 0..dims.locations {
        blended.weights[dims.idx(l, 0, 0)] += 1.0 - t;
    }
    blended
}

/// Clamp solver output into the box and rescale each location's row to sum
/// to exactly one; reject output whose row sums are off by more than 1e-7.
fn cleanup(dims: LinkDims, mut weights: Vec<f64>) -> Result<Selection, SolveError> {
    let per_loc = dims.types * dims.bands;
    for w in weights.iter_mut() {
        *w = w.clamp(0.0, 1.0);
        if *w < 1e-14 {
            *w = 0.0;
        }
    }
    for l in 0..dims.locations {
        let row = &mut weights[l * per_loc..(l + 1) * per_loc];
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-7 {
            return Err(SolveError::Solver(format!(
                "solver returned weights summing to {sum} at location {l}"
            )));
        }
        for w in row.iter_mut() {
            *w /= sum;
        }
    }
    Ok(Selection { dims, weights })
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Solve one of the six problems. Budget problems ignore `error_target`;
/// min-cost problems require it.
pub fn solve(
    scenario: &Scenario,
    table: &LinkTable,
    problem: ProblemId,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    match problem {
        ProblemId::StaticLops => solve_static(scenario, table, Scheme::Analog, options),
        ProblemId::StaticBlops => solve_static(scenario, table, Scheme::Digital, options),
        ProblemId::DynamicLops => solve_dynamic(scenario, table, Scheme::Analog, options),
        ProblemId::DynamicBlops => solve_dynamic(scenario, table, Scheme::Digital, options),
        ProblemId::MinCostStatic => solve_min_cost_static(scenario, table, options),
        ProblemId::MinCostDynamic => solve_min_cost_dynamic(scenario, table, options),
    }
}

/// Minimize the static posterior trace over the relaxed polytope under the
/// given scheme's noise model and spectrum accounting.
pub fn solve_static(
    scenario: &Scenario,
    table: &LinkTable,
    scheme: Scheme,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let objective = StaticObjective::new(scenario, table, scheme)
        .map_err(|e| SolveError::Config(e.to_string()))?;
    let polytope = build_polytope(scenario, table.dims, scheme, options)?;
    let dims = table.dims;
    let tol = options.fw_tol.unwrap_or(1e-6 * objective.prior_trace());

    let as_plan = |w: &[f64]| Selection { dims, weights: w.to_vec() };
    let outcome = frank_wolfe(
        |w| objective.value(&as_plan(w)),
        |w| objective.gradient(&as_plan(w)),
        |g| polytope.lmo(g, options.lp_tol).map(|s| s.weights),
        uniform_start(&polytope).weights,
        tol,
        options.max_iter,
        options.line_search_steps,
    )?;

    let relaxed_selection = cleanup(dims, outcome.x)?;
    let achieved = objective.value(&relaxed_selection);
    let certified = outcome.value - outcome.gap - 1e-12 * outcome.value.abs();
    Ok(SolveReport {
        problem_id: match scheme {
            Scheme::Analog => ProblemId::StaticLops,
            Scheme::Digital => ProblemId::StaticBlops,
        },
        relaxed_selection,
        relaxed_value: certified,
        achieved_value: achieved,
        mmse: achieved,
        info_value: None,
        fw_gap: Some(outcome.gap),
        min_cost: None,
        iterations: outcome.iterations,
    })
}

/// Maximize the total per-interval information of the scalar tracked source
/// (a linear objective) over the relaxed polytope; one LP call.
pub fn solve_dynamic(
    scenario: &Scenario,
    table: &LinkTable,
    scheme: Scheme,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let gamma = info_weights(table, scheme).map_err(|e| SolveError::Config(e.to_string()))?;
    let polytope = build_polytope(scenario, table.dims, scheme, options)?;
    let lp = polytope.lp(Sense::Maximize, gamma.clone(), &[]);
    let solution = solve_lp(&lp, options.lp_tol)?;
    if solution.status != LpStatus::Optimal {
        return Err(SolveError::Solver(
            "selection polytope reported infeasible, but it contains the empty plan".into(),
        ));
    }
    let relaxed_selection = cleanup(table.dims, solution.x)?;
    let achieved = dot(&gamma, &relaxed_selection.weights);
    let info_bound = solution.bound.max(achieved);
    let info_bound = info_bound + 1e-12 * (1.0 + info_bound.abs());
    let prior = &scenario.dynamic_prior;
    Ok(SolveReport {
        problem_id: match scheme {
            Scheme::Analog => ProblemId::DynamicLops,
            Scheme::Digital => ProblemId::DynamicBlops,
        },
        relaxed_selection,
        relaxed_value: info_bound,
        achieved_value: achieved,
        mmse: steady_state_mmse(achieved, prior.a, prior.drive_var),
        info_value: Some(achieved),
        fw_gap: None,
        min_cost: None,
        iterations: solution.iterations,
    })
}

/// One bisection probe of the static min-cost search.
struct Probe {
    /// A Boolean plan meeting the target at this budget, with its cost and
    /// trace, when rounding found one.
    certificate: Option<(Selection, f64, f64)>,
    /// Certified lower bound on the best trace achievable at this budget.
    trace_bound: f64,
    /// Solver iterations spent on this probe.
    iterations: usize,
}

/// Minimize deployment cost subject to a static estimation-error ceiling.
///
/// Bisects on the cost budget: each probe solves the budgeted problem under
/// `options.min_cost_scheme` and then certifies feasibility by randomized
/// rounding — the probe counts as feasible only if an actual Boolean plan
/// meets the target. The report's `relaxed_selection` is that certifying
/// plan (Boolean, not fractional), `min_cost` its cost. `relaxed_value`
/// carries the largest probed budget at which even the *relaxed* problem
/// provably misses the target; this lower bound is often far below
/// `min_cost`, because a fractional sliver of a sensor already improves the
/// trace — the gap reflects integrality, not solver slack.
pub fn solve_min_cost_static(
    scenario: &Scenario,
    table: &LinkTable,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let scheme = options.min_cost_scheme;
    let target = options
        .error_target
        .ok_or_else(|| SolveError::Config("min-cost problems need an error target".into()))?;
    if !target.is_finite() || target <= 0.0 {
        return Err(SolveError::Config(format!(
            "error target must be finite and > 0, got {target}"
        )));
    }
    let objective = StaticObjective::new(scenario, table, scheme)
        .map_err(|e| SolveError::Config(e.to_string()))?;
    let dims = table.dims;
    let prior = objective.prior_trace();

    if fits(prior, target) {
        // Deploying nothing already meets the target.
        let empty = Selection::from_assignment(dims, &vec![(0, 0); dims.locations]);
        return Ok(SolveReport {
            problem_id: ProblemId::MinCostStatic,
            relaxed_selection: empty,
            relaxed_value: 0.0,
            achieved_value: 0.0,
            mmse: prior,
            info_value: None,
            fw_gap: None,
            min_cost: Some(0.0),
            iterations: 0,
        });
    }

    let max_type_cost = scenario
        .sensor_types
        .iter()
        .map(|t| t.cost)
        .fold(0.0, f64::max);
    let lambda_max = max_type_cost * dims.locations as f64;

    let probe = |lambda: f64| -> Result<Probe, SolveError> {
        let mut inner = options.clone();
        inner.cost_cap = Some(lambda);
        let report = solve_static(scenario, table, scheme, &inner)?;
        let polytope = build_polytope(scenario, dims, scheme, &inner)?;
        let rounded = randomized_round(
            &report.relaxed_selection,
            &polytope,
            |s| objective.value(s),
            Sense::Minimize,
            inner.round_draws,
            inner.round_seed,
        );
        let certificate = match rounded {
            Ok(outcome) if fits(outcome.objective, target) => {
                let cost = polytope.cost_of(&outcome.selection);
                Some((outcome.selection, cost, outcome.objective))
            }
            Ok(_) => None,
            Err(other) => return Err(SolveError::Solver(other.to_string())),
        };
        Ok(Probe { certificate, trace_bound: report.relaxed_value, iterations: report.iterations })
    };

    let mut iterations = 0usize;
    let mut cost_lower_bound = 0.0f64;
    let mut best: Option<(Selection, f64, f64)> = None;
    let mut absorb = |p: Probe, lambda: f64, best: &mut Option<(Selection, f64, f64)>| {
        iterations += p.iterations;
        if !fits(p.trace_bound, target) {
            // Even the relaxed problem provably misses the target at this
            // budget, so no Boolean plan under it can succeed either.
            cost_lower_bound = cost_lower_bound.max(lambda);
        }
        if let Some((sel, cost, trace)) = p.certificate {
            let improves = best.as_ref().map_or(true, |(_, c, _)| cost < *c);
            if improves {
                *best = Some((sel, cost, trace));
            }
            true
        } else {
            false
        }
    };

    let full = probe(lambda_max)?;
    let full_bound = full.trace_bound;
    if !absorb(full, lambda_max, &mut best) {
        let reason = if !fits(full_bound, target) {
            format!(
                "the full budget's relaxed optimum {full_bound:.6} provably exceeds the error target {target}"
            )
        } else {
            format!(
                "no rounded plan met the error target {target} even at the full budget {lambda_max}"
            )
        };
        return Err(SolveError::Infeasible(reason));
    }

    let (mut lo, mut hi) = (0.0f64, lambda_max);
    for _ in 0..options.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if absorb(probe(mid)?, mid, &mut best) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let (selection, cost, trace) = best.expect("a certificate exists: the full-budget probe succeeded");
    Ok(SolveReport {
        problem_id: ProblemId::MinCostStatic,
        relaxed_selection: selection,
        relaxed_value: cost_lower_bound,
        achieved_value: cost,
        mmse: trace,
        info_value: None,
        fw_gap: None,
        min_cost: Some(cost),
        iterations,
    })
}

/// Minimize deployment cost subject to a tracking-error ceiling. The error
/// ceiling maps to an information floor, making the problem a single LP
/// over the analog (channel-budget) polytope with the cost cap lifted.
pub fn solve_min_cost_dynamic(
    scenario: &Scenario,
    table: &LinkTable,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let target = options
        .error_target
        .ok_or_else(|| SolveError::Config("min-cost problems need an error target".into()))?;
    let prior = &scenario.dynamic_prior;
    let info_floor = info_bound_for_error(target, prior.a, prior.drive_var)
        .map_err(|e| SolveError::Config(e.to_string()))?;
    let gamma =
        info_weights(table, Scheme::Analog).map_err(|e| SolveError::Config(e.to_string()))?;
    let dims = table.dims;

    // Cost is the objective here, so lift the polytope's cost cap to the
    // total cost of the most expensive full deployment (unreachable-by-one).
    let max_type_cost = scenario
        .sensor_types
        .iter()
        .map(|t| t.cost)
        .fold(0.0, f64::max);
    let mut inner = options.clone();
    inner.cost_cap = Some(max_type_cost * dims.locations as f64);
    let polytope = build_polytope(scenario, dims, Scheme::Analog, &inner)?;

    let costs = cost_vector(scenario, dims);
    let floor_row: Vec<f64> = gamma.iter().map(|g| -g).collect();
    let lp = polytope.lp(Sense::Minimize, costs.clone(), &[(floor_row, -info_floor)]);
    let solution = solve_lp(&lp, options.lp_tol)?;
    if solution.status != LpStatus::Optimal {
        return Err(SolveError::Infeasible(format!(
            "error target {target} needs information {info_floor:.6}, above what the channel budget can supply"
        )));
    }
    let relaxed_selection = cleanup(dims, solution.x)?;
    let cost = dot(&costs, &relaxed_selection.weights);
    let info = dot(&gamma, &relaxed_selection.weights);
    Ok(SolveReport {
        problem_id: ProblemId::MinCostDynamic,
        relaxed_selection,
        relaxed_value: solution.bound.max(0.0),
        achieved_value: cost,
        mmse: steady_state_mmse(info, prior.a, prior.drive_var),
        info_value: Some(info),
        fw_gap: None,
        min_cost: Some(cost),
        iterations: solution.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{channel_precisions, weighted_total};
    use crate::rounding::{exhaustive_search, DEFAULT_SEARCH_CAP};
    use crate::scenario::{
        Band, BaseStation, Budgets, DynamicPrior, Field, Diffusion, Noise, Point, Power,
        ResourceGrid, Scenario, SensorType,
    };
    use std::cell::RefCell;

    /// Effective noise temperature that makes the per-channel receiver noise
    /// land exactly on 1e-9 W for a 10 kHz channel.
    const TEST_TEMPERATURE: f64 = 7242702976.750924;

    /// Four corner locations, one source, two sensor types, two bandwidths.
    fn test_scenario(budgets: Budgets) -> Scenario {
        let s = Scenario {
            field: Field {
                size: (400.0, 400.0),
                path_loss_exponent: 2.0,
                diffusion: Diffusion { gain: 10.0, decay: 100.0, cutoff: 1e9 },
                solar_floor: Power(1e-6),
            },
            locations: vec![
                Point::new(100.0, 100.0),
                Point::new(100.0, 300.0),
                Point::new(300.0, 100.0),
                Point::new(300.0, 300.0),
            ],
            sources: vec![Point::new(200.0, 220.0)],
            fc: Point::new(200.0, 200.0),
            base_stations: vec![BaseStation { position: Point::new(0.0, 0.0), power: Power(1.0) }],
            sensor_types: vec![
                SensorType { cost: 0.0, eh_efficiency: 0.0, battery_cap: Power(0.0) },
                SensorType { cost: 1.0, eh_efficiency: 0.3, battery_cap: Power(3e-4) },
                SensorType { cost: 2.0, eh_efficiency: 0.9, battery_cap: Power(9e-4) },
            ],
            bandwidths: vec![
                Band { hz: 20_000.0, channels: 20 },
                Band { hz: 40_000.0, channels: 40 },
            ],
            grid: ResourceGrid {
                interval: 1e-3,
                bandwidth: 1e6,
                time_channels: 10,
                freq_channels: 100,
                modulation: 1.0,
            },
            budgets,
            noise: Noise { measurement_var: 1.0, temperature: TEST_TEMPERATURE },
            static_prior: vec![vec![2.0]],
            dynamic_prior: DynamicPrior { a: 0.6, drive_var: 2.0, initial_mean: 0.0 },
        };
        s.validate().expect("test scenario must validate");
        s
    }

    fn loose_budgets() -> Budgets {
        Budgets { cost: 100.0, bandwidth: 1e6, channels: 100 }
    }

    #[test]
    fn fw_linear_objective_converges_immediately() {
        // A linear objective puts the optimum at the first LMO vertex.
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let polytope =
            build_polytope(&scenario, table.dims, Scheme::Digital, &SolveOptions::default())
                .expect("polytope");
        let cost: Vec<f64> = (0..table.dims.cells()).map(|i| (i % 7) as f64 - 3.0).collect();
        let outcome = frank_wolfe(
            |x| dot(&cost, x),
            |_| cost.clone(),
            |g| polytope.lmo(g, 1e-9).map(|s| s.weights),
            uniform_start(&polytope).weights,
            1e-9,
            100,
            50,
        )
        .expect("solve");
        assert!(outcome.iterations <= 1, "linear objectives need one step, took {}", outcome.iterations);
        assert!(outcome.gap <= 1e-9, "gap must close, got {}", outcome.gap);
        let vertex = polytope.lmo(&cost, 1e-9).expect("lmo");
        assert!(
            (outcome.value - dot(&cost, &vertex.weights)).abs() <= 1e-9,
            "value must match the LMO vertex"
        );
    }

    #[test]
    fn fw_finds_interior_quadratic_minimum() {
        // Minimize (x - 0.3)^2 over [0, 1]: the optimum is interior, which
        // pure vertex-hopping cannot express but line search finds.
        let outcome = frank_wolfe(
            |x| (x[0] - 0.3) * (x[0] - 0.3),
            |x| vec![2.0 * (x[0] - 0.3)],
            |g| Ok::<_, SolveError>(vec![if g[0] > 0.0 { 0.0 } else { 1.0 }]),
            vec![0.0],
            1e-12,
            100,
            60,
        )
        .expect("solve");
        assert!(
            (outcome.x[0] - 0.3).abs() < 1e-9,
            "interior minimum must be located, got {}",
            outcome.x[0]
        );
        assert!(outcome.value < 1e-18, "objective must vanish at the minimum");
    }

    #[test]
    fn fw_values_never_increase() {
        let scenario = test_scenario(Budgets { cost: 3.0, bandwidth: 1e6, channels: 100 });
        let table = LinkTable::build(&scenario).expect("table");
        let objective =
            StaticObjective::new(&scenario, &table, Scheme::Digital).expect("objective");
        let polytope =
            build_polytope(&scenario, table.dims, Scheme::Digital, &SolveOptions::default())
                .expect("polytope");
        let dims = table.dims;
        let history = RefCell::new(Vec::new());
        let outcome = frank_wolfe(
            |w| {
                let v = objective.value(&Selection { dims, weights: w.to_vec() });
                history.borrow_mut().push(v);
                v
            },
            |w| objective.gradient(&Selection { dims, weights: w.to_vec() }),
            |g| polytope.lmo(g, 1e-9).map(|s| s.weights),
            uniform_start(&polytope).weights,
            1e-10,
            200,
            50,
        )
        .expect("solve");
        let history = history.into_inner();
        assert!(history.len() > 2, "the loop must take several steps");
        for pair in history.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-12 * (1.0 + pair[0].abs()),
                "line-searched steps must never increase the objective: {} -> {}",
                pair[0],
                pair[1]
            );
        }
        assert!(outcome.gap >= 0.0, "the duality gap is nonnegative");
    }

    #[test]
    fn empty_budget_returns_prior_trace() {
        let scenario = test_scenario(Budgets { cost: 0.0, bandwidth: 1e6, channels: 100 });
        let table = LinkTable::build(&scenario).expect("table");
        let report = solve(&scenario, &table, ProblemId::StaticLops, &SolveOptions::default())
            .expect("solve");
        assert!(
            (report.achieved_value - 2.0).abs() < 1e-9,
            "nothing affordable leaves the prior trace, got {}",
            report.achieved_value
        );
        assert!(report.relaxed_value <= 2.0 + 1e-9, "certified bound stays below the prior");
        assert_eq!(
            report.relaxed_selection.assignment().expect("boolean"),
            vec![(0, 0); 4],
            "the plan deploys nothing"
        );
    }

    #[test]
    fn rich_budget_matches_per_location_argmax() {
        // With both budgets slack the trace is minimized by independently
        // giving each location its highest-precision analog cell.
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let precisions = channel_precisions(&table, Scheme::Analog);
        let dims = table.dims;
        let u: Vec<f64> = (0..dims.locations)
            .map(|l| {
                (1..dims.types)
                    .map(|k| precisions[dims.idx(l, k, 0)])
                    .fold(0.0, f64::max)
            })
            .collect();
        let objective = StaticObjective::new(&scenario, &table, Scheme::Analog).expect("objective");
        let oracle = objective.value_at_precisions(&u);

        let report = solve(&scenario, &table, ProblemId::StaticLops, &SolveOptions::default())
            .expect("solve");
        assert!(
            (report.achieved_value - oracle).abs() <= 1e-5 * oracle,
            "slack budgets decouple locations: solver {} vs oracle {}",
            report.achieved_value,
            oracle
        );
        assert!(report.relaxed_value <= oracle + 1e-9, "certified bound must not exceed the optimum");
    }

    #[test]
    fn static_relaxation_sandwiches_boolean_optimum() {
        for scheme in [Scheme::Analog, Scheme::Digital] {
            let scenario = test_scenario(Budgets { cost: 3.0, bandwidth: 50_000.0, channels: 2 });
            let table = LinkTable::build(&scenario).expect("table");
            let objective = StaticObjective::new(&scenario, &table, scheme).expect("objective");
            let options = SolveOptions { fw_tol: Some(1e-9), ..SolveOptions::default() };
            let report = solve_static(&scenario, &table, scheme, &options).expect("solve");
            let polytope =
                build_polytope(&scenario, table.dims, scheme, &options).expect("polytope");

            let best = exhaustive_search(
                &polytope,
                |s| objective.value(s),
                Sense::Minimize,
                DEFAULT_SEARCH_CAP,
            )
            .expect("exhaustive");
            let rounded = randomized_round(
                &report.relaxed_selection,
                &polytope,
                |s| objective.value(s),
                Sense::Minimize,
                200,
                7,
            )
            .expect("round");

            assert!(
                report.relaxed_value <= best.objective + 1e-9,
                "{scheme:?}: certified relaxed bound {} must not exceed the boolean optimum {}",
                report.relaxed_value,
                best.objective
            );
            assert!(
                best.objective <= rounded.objective + 1e-9,
                "{scheme:?}: boolean optimum {} must not exceed the rounded plan {}",
                best.objective,
                rounded.objective
            );
            let gap = report.fw_gap.expect("static solves report a gap");
            assert!(
                report.achieved_value - best.objective <= gap + 1e-9,
                "{scheme:?}: the duality gap bounds suboptimality"
            );
        }
    }

    #[test]
    fn single_location_digital_picks_best_cell() {
        let mut scenario = test_scenario(loose_budgets());
        scenario.locations.truncate(1);
        scenario.validate().expect("still valid");
        let table = LinkTable::build(&scenario).expect("table");
        let objective = StaticObjective::new(&scenario, &table, Scheme::Digital).expect("objective");
        let dims = table.dims;

        let mut oracle = f64::INFINITY;
        for k in 0..dims.types {
            for b in 0..dims.bands {
                if k == 0 && b > 0 {
                    continue;
                }
                let plan = Selection::from_assignment(dims, &[(k, b)]);
                oracle = oracle.min(objective.value(&plan));
            }
        }
        let report = solve(&scenario, &table, ProblemId::StaticBlops, &SolveOptions::default())
            .expect("solve");
        assert!(
            (report.achieved_value - oracle).abs() <= 1e-6 * oracle,
            "one location reduces to cell enumeration: solver {} vs oracle {}",
            report.achieved_value,
            oracle
        );
    }

    #[test]
    fn slack_bandwidth_matches_looser_cap() {
        let scenario = test_scenario(Budgets { cost: 5.0, bandwidth: 1e9, channels: 1000 });
        let table = LinkTable::build(&scenario).expect("table");
        let tight = solve(&scenario, &table, ProblemId::StaticBlops, &SolveOptions::default())
            .expect("solve");
        let looser = solve(
            &scenario,
            &table,
            ProblemId::StaticBlops,
            &SolveOptions { spectrum_cap: Some(1e12), ..SolveOptions::default() },
        )
        .expect("solve");
        assert!(
            (tight.achieved_value - looser.achieved_value).abs() < 1e-9,
            "a slack bandwidth budget cannot change the optimum: {} vs {}",
            tight.achieved_value,
            looser.achieved_value
        );
    }

    #[test]
    fn dynamic_zero_budget_keeps_stationary_error() {
        let scenario = test_scenario(Budgets { cost: 0.0, bandwidth: 1e6, channels: 100 });
        let table = LinkTable::build(&scenario).expect("table");
        let report = solve(&scenario, &table, ProblemId::DynamicLops, &SolveOptions::default())
            .expect("solve");
        let stationary = scenario.dynamic_prior.stationary_var();
        assert!(report.info_value.expect("dynamic reports info") < 1e-12, "no sensors, no information");
        assert!(
            (report.mmse - stationary).abs() < 1e-12,
            "tracking error falls back to the stationary variance {stationary}"
        );
        assert!(report.relaxed_value < 1e-9, "certified info bound is zero");
    }

    #[test]
    fn dynamic_single_sensor_takes_max_coefficient() {
        // One channel available: the LP must spend it on the single best
        // (location, type) information coefficient.
        let scenario = test_scenario(Budgets { cost: 100.0, bandwidth: 1e6, channels: 1 });
        let table = LinkTable::build(&scenario).expect("table");
        let gamma = info_weights(&table, Scheme::Analog).expect("weights");
        let dims = table.dims;
        let report = solve(&scenario, &table, ProblemId::DynamicLops, &SolveOptions::default())
            .expect("solve");

        let mut best_cell = (0, 0);
        let mut best = 0.0;
        for l in 0..dims.locations {
            for k in 1..dims.types {
                if gamma[dims.idx(l, k, 0)] > best {
                    best = gamma[dims.idx(l, k, 0)];
                    best_cell = (l, k);
                }
            }
        }
        assert!(
            (report.achieved_value - best).abs() <= 1e-9 * best,
            "one channel buys the best coefficient {best}, solver got {}",
            report.achieved_value
        );
        let assignment = report.relaxed_selection.assignment().expect("LP vertex is boolean here");
        assert_eq!(
            assignment[best_cell.0],
            (best_cell.1, 0),
            "the winning cell carries the sensor"
        );
    }

    #[test]
    fn dynamic_relaxation_bounds_every_boolean_plan() {
        let scenario = test_scenario(Budgets { cost: 3.0, bandwidth: 60_000.0, channels: 2 });
        let table = LinkTable::build(&scenario).expect("table");
        let gamma = info_weights(&table, Scheme::Digital).expect("weights");
        let options = SolveOptions::default();
        let report = solve(&scenario, &table, ProblemId::DynamicBlops, &options).expect("solve");
        let polytope =
            build_polytope(&scenario, table.dims, Scheme::Digital, &options).expect("polytope");
        let best = exhaustive_search(
            &polytope,
            |s| weighted_total(s, &gamma),
            Sense::Maximize,
            DEFAULT_SEARCH_CAP,
        )
        .expect("exhaustive");
        assert!(
            report.relaxed_value >= best.objective - 1e-9,
            "certified info bound {} must cover the boolean optimum {}",
            report.relaxed_value,
            best.objective
        );
        assert!(
            report.achieved_value >= best.objective - 1e-9,
            "the relaxed optimum dominates every boolean plan"
        );
    }

    #[test]
    fn min_cost_static_prior_target_costs_nothing() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let options = SolveOptions { error_target: Some(2.0), ..SolveOptions::default() };
        let report =
            solve(&scenario, &table, ProblemId::MinCostStatic, &options).expect("solve");
        assert_eq!(report.min_cost, Some(0.0), "the prior already meets a target of its own trace");
        assert_eq!(
            report.relaxed_selection.assignment().expect("boolean"),
            vec![(0, 0); 4],
            "no sensors are deployed"
        );
    }

    #[test]
    fn min_cost_static_matches_single_sensor_enumeration() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let objective = StaticObjective::new(&scenario, &table, Scheme::Analog).expect("objective");
        let dims = table.dims;

        // Oracle: cheapest single sensor whose trace meets the target.
        let mut best_single = f64::INFINITY;
        let mut traces = Vec::new();
        for l in 0..dims.locations {
            for k in 1..dims.types {
                let mut assignment = vec![(0, 0); dims.locations];
                assignment[l] = (k, 0);
                let trace = objective.value(&Selection::from_assignment(dims, &assignment));
                traces.push((trace, scenario.sensor_types[k].cost));
                best_single = best_single.min(trace);
            }
        }
        let target = 0.5 * (best_single + objective.prior_trace());
        let oracle_cost = traces
            .iter()
            .filter(|(trace, _)| fits(*trace, target))
            .map(|(_, cost)| *cost)
            .fold(f64::INFINITY, f64::min);

        let options = SolveOptions { error_target: Some(target), ..SolveOptions::default() };
        let report =
            solve(&scenario, &table, ProblemId::MinCostStatic, &options).expect("solve");
        assert!(
            (report.min_cost.expect("cost") - oracle_cost).abs() < 1e-9,
            "a just-below-prior target buys the cheapest sufficient sensor: {} vs {}",
            report.min_cost.unwrap(),
            oracle_cost
        );
        assert!(fits(report.mmse, target), "the certificate meets the target");
        assert!(
            report.relaxed_selection.is_boolean(1e-12),
            "min-cost static returns the certifying boolean plan"
        );
        assert!(
            report.relaxed_value <= report.min_cost.unwrap() + 1e-9,
            "the certified lower bound cannot exceed the certified cost"
        );
    }

    #[test]
    fn min_cost_static_matches_grid_scan() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let objective = StaticObjective::new(&scenario, &table, Scheme::Analog).expect("objective");
        let target = 1.2; // needs more than one sensor on this layout
        let options = SolveOptions {
            error_target: Some(target),
            round_draws: 300,
            ..SolveOptions::default()
        };
        let report =
            solve(&scenario, &table, ProblemId::MinCostStatic, &options).expect("solve");

        // Dense budget scan using the same probe machinery.
        let lambda_max = 2.0 * 4.0;
        let mut scan_best = f64::INFINITY;
        for i in 0..=80 {
            let lambda = lambda_max * i as f64 / 80.0;
            let mut inner = options.clone();
            inner.cost_cap = Some(lambda);
            let probe = solve_static(&scenario, &table, Scheme::Analog, &inner).expect("solve");
            let polytope =
                build_polytope(&scenario, table.dims, Scheme::Analog, &inner).expect("polytope");
            if let Ok(outcome) = randomized_round(
                &probe.relaxed_selection,
                &polytope,
                |s| objective.value(s),
                Sense::Minimize,
                300,
                options.round_seed,
            ) {
                if fits(outcome.objective, target) {
                    scan_best = scan_best.min(polytope.cost_of(&outcome.selection));
                }
            }
        }
        assert!(
            (report.min_cost.expect("cost") - scan_best).abs() < 1e-9,
            "bisection {} must agree with an 80-point budget scan {}",
            report.min_cost.unwrap(),
            scan_best
        );
    }

    #[test]
    fn min_cost_static_unreachable_target_is_infeasible() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let options = SolveOptions { error_target: Some(1e-6), ..SolveOptions::default() };
        let err = solve(&scenario, &table, ProblemId::MinCostStatic, &options)
            .expect_err("a near-zero error target is unreachable");
        match err {
            SolveError::Infeasible(msg) => {
                assert!(msg.contains("target"), "message explains the failure: {msg}");
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
        assert_eq!(
            SolveError::Infeasible(String::new()).exit_code(),
            2,
            "infeasibility maps to exit code 2"
        );
    }

    #[test]
    fn min_cost_dynamic_matches_lambda_bisection() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let target = 1.5;
        let options = SolveOptions { error_target: Some(target), ..SolveOptions::default() };
        let report =
            solve(&scenario, &table, ProblemId::MinCostDynamic, &options).expect("solve");
        let cost = report.min_cost.expect("cost");

        // Independent route: bisect the cost budget of the info-max problem
        // until the relaxed information just reaches the floor.
        let prior = &scenario.dynamic_prior;
        let floor = info_bound_for_error(target, prior.a, prior.drive_var).expect("floor");
        let reaches = |lambda: f64| -> bool {
            let inner = SolveOptions { cost_cap: Some(lambda), ..SolveOptions::default() };
            let r = solve_dynamic(&scenario, &table, Scheme::Analog, &inner).expect("solve");
            fits(floor, r.achieved_value)
        };
        let (mut lo, mut hi) = (0.0, 8.0);
        assert!(reaches(hi), "the full budget must reach the floor");
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if reaches(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(
            (cost - hi).abs() <= 1e-6 * (1.0 + hi),
            "direct LP cost {cost} must match the budget-bisection threshold {hi}"
        );
        assert!(fits(floor, report.info_value.expect("info")), "the plan supplies the floor");
        assert!(fits(report.mmse, target), "the error target is met");
        assert!(
            report.relaxed_value <= cost + 1e-9 * (1.0 + cost),
            "the dual bound stays below the primal cost"
        );
    }

    #[test]
    fn min_cost_dynamic_trivial_and_unreachable_targets() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let stationary = scenario.dynamic_prior.stationary_var();

        let free = SolveOptions { error_target: Some(stationary), ..SolveOptions::default() };
        let report = solve(&scenario, &table, ProblemId::MinCostDynamic, &free).expect("solve");
        assert!(
            report.min_cost.expect("cost") < 1e-9,
            "the stationary variance costs nothing to achieve"
        );

        let strict = SolveOptions { error_target: Some(0.01), ..SolveOptions::default() };
        let err = solve(&scenario, &table, ProblemId::MinCostDynamic, &strict)
            .expect_err("a hundredfold error reduction is beyond the catalog");
        assert!(matches!(err, SolveError::Infeasible(_)), "unreachable floors are infeasible: {err:?}");
    }

    #[test]
    fn restriction_never_helps() {
        let scenario = test_scenario(Budgets { cost: 4.0, bandwidth: 80_000.0, channels: 4 });
        let table = LinkTable::build(&scenario).expect("table");
        let flexible = solve(&scenario, &table, ProblemId::StaticBlops, &SolveOptions::default())
            .expect("solve");
        // Forbid the strong type 2, keeping type 1 and the empty type.
        let mask = vec![true, true, true, true, false, false];
        let restricted = solve(
            &scenario,
            &table,
            ProblemId::StaticBlops,
            &SolveOptions { cell_mask: Some(mask), ..SolveOptions::default() },
        )
        .expect("solve");
        assert!(
            flexible.achieved_value <= restricted.achieved_value + 1e-6,
            "restricting the catalog cannot improve the optimum: {} vs {}",
            flexible.achieved_value,
            restricted.achieved_value
        );
    }

    #[test]
    fn budget_growth_never_hurts() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let mut previous = f64::INFINITY;
        for lambda in [0.0, 1.0, 2.0, 4.0, 8.0] {
            let options = SolveOptions { cost_cap: Some(lambda), ..SolveOptions::default() };
            let report = solve(&scenario, &table, ProblemId::StaticLops, &options).expect("solve");
            assert!(
                report.achieved_value <= previous + 1e-8,
                "a larger budget cannot worsen the error: {} after {}",
                report.achieved_value,
                previous
            );
            previous = report.achieved_value;
        }
    }

    #[test]
    fn user_mask_must_keep_empty_cell() {
        let scenario = test_scenario(loose_budgets());
        let table = LinkTable::build(&scenario).expect("table");
        let mask = vec![false, true, true, true, true, true];
        let err = solve(
            &scenario,
            &table,
            ProblemId::StaticLops,
            &SolveOptions { cell_mask: Some(mask), ..SolveOptions::default() },
        )
        .expect_err("masking the empty cell leaves no fallback");
        match &err {
            SolveError::Config(msg) => {
                assert!(msg.contains("empty assignment"), "message names the problem: {msg}");
            }
            other => panic!("expected Config, got {other:?}"),
        }
        assert_eq!(err.exit_code(), 4, "configuration errors map to exit code 4");
    }

    #[test]
    fn problem_tokens_round_trip() {
        for problem in ProblemId::ALL {
            let token = problem.token();
            assert_eq!(
                ProblemId::from_str(token).expect("parse"),
                problem,
                "token {token} must parse back"
            );
            assert_eq!(problem.to_string(), token, "display uses the token");
        }
        assert_eq!(
            serde_json::to_string(&ProblemId::StaticBlops).expect("json"),
            "\"StaticBLoPS\"",
            "serialized names keep their documented spelling"
        );
        assert!(ProblemId::from_str("static").is_err(), "partial tokens are rejected");
        assert!(ProblemId::MinCostStatic.is_min_cost());
        assert!(ProblemId::MinCostDynamic.is_dynamic());
        assert!(!ProblemId::StaticLops.is_dynamic());
    }

    #[test]
    fn solves_are_deterministic() {
        let scenario = test_scenario(Budgets { cost: 3.0, bandwidth: 60_000.0, channels: 2 });
        let table = LinkTable::build(&scenario).expect("table");
        for problem in [ProblemId::StaticBlops, ProblemId::DynamicLops] {
            let a = solve(&scenario, &table, problem, &SolveOptions::default()).expect("solve");
            let b = solve(&scenario, &table, problem, &SolveOptions::default()).expect("solve");
            assert_eq!(
                a.relaxed_selection.weights, b.relaxed_selection.weights,
                "{problem}: identical options must reproduce the plan"
            );
            assert_eq!(a.relaxed_value, b.relaxed_value, "{problem}: and the certified value");
        }
    }
}
