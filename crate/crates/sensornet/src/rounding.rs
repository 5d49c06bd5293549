//! Turning fractional plans into deployable ones.
//!
//! The relaxed solvers in [`crate::relax`] return one unit of selection
//! weight per location spread over `(type, bandwidth)` cells. A deployable
//! plan needs that weight concentrated on a single cell per location while
//! still respecting the cost and spectrum budgets. This module provides:
//!
//! - [`randomized_round`]: draw many candidate plans by sampling each
//!   location's cell from its relaxed weights, repair any draw that lands
//!   outside the polytope (see [`repair_plan`]), and return the best
//!   candidate under the caller's objective. Each draw is addressed by a
//!   `(seed, realization, location)` triple mapped to its own counter-mode
//!   RNG stream, so draws are reproducible and one location's weights never
//!   perturb another location's samples.
//! - [`exhaustive_search`]: a depth-first enumeration of every Boolean plan
//!   with budget-based pruning, used as a ground-truth baseline on small
//!   instances.
//! - [`feasibility_check`]: a diagnostic that names every violated
//!   constraint instead of answering with a bare boolean.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lp::{fits, SelectionPolytope, Sense};
use crate::objective::Selection;

/// Default number of randomized rounding draws.
pub const DEFAULT_DRAWS: usize = 1000;
/// Default ceiling on the number of plans [`exhaustive_search`] will visit.
pub const DEFAULT_SEARCH_CAP: u64 = 20_000_000;

/// Tolerance used when testing candidate plans against the polytope.
const FEASIBILITY_TOL: f64 = 1e-9;

/// Failure modes of the rounding and search routines.
#[derive(Debug, Error)]
pub enum RoundingError {
    /// A location's relaxed weights were all zero (or negative), so no cell
    /// can be sampled for it.
    #[error("location {location} has no positive selection weight to sample from")]
    BadWeights {
        /// Index of the offending location.
        location: usize,
    },
    /// The Boolean search space is too large to enumerate.
    #[error("search space holds {candidates:.3e} plans, above the cap of {cap}")]
    SearchTooLarge {
        /// Number of plans the enumeration would visit.
        candidates: f64,
        /// The configured ceiling.
        cap: u64,
    },
    /// Every enumerated plan was pruned; the polytope admits no Boolean plan.
    #[error("exhaustive search found no feasible plan")]
    NoFeasiblePlan,
}

/// Result of a randomized rounding run.
#[derive(Debug, Clone)]
pub struct RoundingOutcome {
    /// The best feasible Boolean plan found.
    pub selection: Selection,
    /// The caller's objective evaluated at [`RoundingOutcome::selection`].
    pub objective: f64,
    /// Total draws attempted.
    pub draws: usize,
    /// How many draws satisfied every constraint as drawn.
    pub feasible: usize,
    /// How many draws violated a constraint and entered the candidate pool
    /// through [`repair_plan`] instead.
    pub repaired: usize,
}

/// Result of an exhaustive Boolean search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// The optimal Boolean plan.
    pub selection: Selection,
    /// The caller's objective evaluated at [`SearchOutcome::selection`].
    pub objective: f64,
    /// Number of feasible plans evaluated (pruned branches not counted).
    pub visited: u64,
}

/// Outcome of [`feasibility_check`]: a verdict plus one message per
/// violated constraint.
#[derive(Debug, Clone)]
pub struct Verdict {
    /// `true` when the plan satisfies every polytope constraint.
    pub feasible: bool,
    /// Human-readable description of each violation, empty when feasible.
    pub violations: Vec<String>,
}

/// Draw one Boolean plan from a fractional one. Each location's cell is
/// sampled from that location's relaxed weights (negative weights are
/// treated as zero). The draw for location `l` of realization `r` comes from
/// RNG stream `(r << 32) | l` of the seeded generator, so the sample at one
/// location is unaffected by edits to any other location's weights.
pub fn sample_plan(relaxed: &Selection, seed: u64, realization: u64) -> Result<Selection, RoundingError> {
    let dims = relaxed.dims;
    let per_loc = dims.types * dims.bands;
    let mut weights = vec![0.0; dims.cells()];
    for l in 0..dims.locations {
        let row = &relaxed.weights[l * per_loc..(l + 1) * per_loc];
        let clamped: Vec<f64> = row.iter().map(|w| w.max(0.0)).collect();
        let table =
            WeightedIndex::new(&clamped).map_err(|_| RoundingError::BadWeights { location: l })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((realization << 32) | l as u64);
        weights[l * per_loc + table.sample(&mut rng)] = 1.0;
    }
    Ok(Selection { dims, weights })
}

/// Make a Boolean plan feasible by demoting locations to the empty cell.
///
/// Locations resting on a masked-out cell are demoted first. Then, while a
/// budget is still violated, the location whose selected cell carries the
/// largest share of the violated budgets (cell cost over the cost cap plus
/// cell spectrum use over the spectrum cap, summed over violated budgets
/// only) is demoted; ties demote the lowest location index. Demotion only
/// ever sheds load and the empty plan satisfies any nonnegative budget, so
/// the result is always feasible. The repair is a deterministic function of
/// the input plan.
///
/// Independent per-location sampling can have zero probability of hitting
/// the feasible set — at a relaxed optimum where both budgets are tight and
/// some location keeps no weight on its empty cell, every draw overshoots a
/// budget. Repair turns those draws into nearby feasible plans instead of
/// discarding them.
pub fn repair_plan(plan: &Selection, polytope: &SelectionPolytope) -> Selection {
    let dims = plan.dims;
    let per_loc = dims.types * dims.bands;
    let mut repaired = plan.clone();
    let demote = |weights: &mut [f64], l: usize, cell: usize| {
        weights[cell] = 0.0;
        weights[l * per_loc] = 1.0;
    };

    for l in 0..dims.locations {
        for c in l * per_loc..(l + 1) * per_loc {
            if repaired.weights[c] > 0.0 && !polytope.cell_allowed(c) {
                demote(&mut repaired.weights, l, c);
            }
        }
    }

    loop {
        let cost_over = !fits(polytope.cost_of(&repaired), polytope.cost_cap);
        let resource_over = !fits(polytope.resource_of(&repaired), polytope.resource_cap);
        if !cost_over && !resource_over {
            return repaired;
        }
        let mut worst: Option<(f64, usize, usize)> = None;
        for l in 0..dims.locations {
            for c in l * per_loc..(l + 1) * per_loc {
                if repaired.weights[c] <= 0.0 {
                    continue;
                }
                let mut burden = 0.0;
                if cost_over {
                    burden += polytope.cell_cost(c) / polytope.cost_cap.max(f64::MIN_POSITIVE);
                }
                if resource_over {
                    burden +=
                        polytope.cell_resource(c) / polytope.resource_cap.max(f64::MIN_POSITIVE);
                }
                if burden > 0.0 && worst.as_ref().is_none_or(|&(top, _, _)| burden > top) {
                    worst = Some((burden, l, c));
                }
            }
        }
        // A violated budget always has a positive contributor, so `worst` is
        // populated whenever the loop continues.
        let (_, l, cell) = worst.expect("a violated budget has a contributing cell");
        demote(&mut repaired.weights, l, cell);
    }
}

/// Round a fractional plan to a feasible Boolean one by repeated sampling.
///
/// Runs `draws` realizations of [`sample_plan`]. Draws inside the polytope
/// enter the candidate pool as-is; draws outside it enter through
/// [`repair_plan`]. The candidate with the best `objective` value under
/// `sense` wins, ties keeping the earliest realization. Since every draw
/// yields a feasible candidate, rounding succeeds whenever the relaxed
/// weights are sampleable at all.
pub fn randomized_round(
    relaxed: &Selection,
    polytope: &SelectionPolytope,
    objective: impl Fn(&Selection) -> f64,
    sense: Sense,
    draws: usize,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    assert!(draws > 0, "randomized rounding needs at least one draw");
    let mut best: Option<(Selection, f64)> = None;
    let mut feasible = 0usize;
    let mut repaired = 0usize;
    for realization in 0..draws {
        let drawn = sample_plan(relaxed, seed, realization as u64)?;
        let candidate = if polytope.contains(&drawn, FEASIBILITY_TOL) {
            feasible += 1;
            drawn
        } else {
            repaired += 1;
            repair_plan(&drawn, polytope)
        };
        let value = objective(&candidate);
        let better = match &best {
            None => true,
            Some((_, incumbent)) => match sense {
                Sense::Minimize => value < *incumbent,
                Sense::Maximize => value > *incumbent,
            },
        };
        if better {
            best = Some((candidate, value));
        }
    }
    let (selection, objective) = best.expect("at least one draw ran");
    Ok(RoundingOutcome { selection, objective, draws, feasible, repaired })
}

/// Find the optimal Boolean plan by pruned depth-first enumeration.
///
/// Candidate cells per location are the polytope-allowed ones, with the
/// empty type pinned to bandwidth slot 0 (its other copies describe the same
/// physical non-deployment and would only multiply the search space).
/// Branches whose partial cost or spectrum use already exceeds a budget are
/// cut; this requires nonnegative per-cell costs and spectrum use. Ties keep
/// the first plan in enumeration order (locations ascending, cells in flat
/// `(type, bandwidth)` order). Errors out if the space exceeds `cap` plans.
pub fn exhaustive_search(
    polytope: &SelectionPolytope,
    objective: impl Fn(&Selection) -> f64,
    sense: Sense,
    cap: u64,
) -> Result<SearchOutcome, RoundingError> {
    let dims = polytope.dims;
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(dims.locations);
    for l in 0..dims.locations {
        let mut cells = Vec::new();
        for k in 0..dims.types {
            for b in 0..dims.bands {
                if k == 0 && b > 0 {
                    continue;
                }
                let idx = (l * dims.types + k) * dims.bands + b;
                if !polytope.cell_allowed(idx) {
                    continue;
                }
                assert!(
                    polytope.cell_cost(idx) >= 0.0 && polytope.cell_resource(idx) >= 0.0,
                    "pruned search requires nonnegative per-cell cost and spectrum use"
                );
                cells.push(idx);
            }
        }
        if cells.is_empty() {
            return Err(RoundingError::NoFeasiblePlan);
        }
        candidates.push(cells);
    }

    let space: f64 = candidates.iter().map(|c| c.len() as f64).product();
    if space > cap as f64 {
        return Err(RoundingError::SearchTooLarge { candidates: space, cap });
    }

    let mut current = Selection { dims, weights: vec![0.0; dims.cells()] };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut visited = 0u64;
    descend(0, &candidates, polytope, &objective, sense, 0.0, 0.0, &mut current, &mut best, &mut visited);

    match best {
        Some((weights, objective)) => {
            Ok(SearchOutcome { selection: Selection { dims, weights }, objective, visited })
        }
        None => Err(RoundingError::NoFeasiblePlan),
    }
}

/// Depth-first walk over per-location candidate cells with budget pruning.
#[allow(clippy::too_many_arguments)]
fn descend<F: Fn(&Selection) -> f64>(
    l: usize,
    candidates: &[Vec<usize>],
    polytope: &SelectionPolytope,
    objective: &F,
    sense: Sense,
    cost: f64,
    resource: f64,
    current: &mut Selection,
    best: &mut Option<(Vec<f64>, f64)>,
    visited: &mut u64,
) {
    if l == candidates.len() {
        *visited += 1;
        let value = objective(current);
        let better = match best {
            None => true,
            Some((_, incumbent)) => match sense {
                Sense::Minimize => value < *incumbent,
                Sense::Maximize => value > *incumbent,
            },
        };
        if better {
            *best = Some((current.weights.clone(), value));
        }
        return;
    }
    for &idx in &candidates[l] {
        let next_cost = cost + polytope.cell_cost(idx);
        let next_resource = resource + polytope.cell_resource(idx);
        if !fits(next_cost, polytope.cost_cap) || !fits(next_resource, polytope.resource_cap) {
            continue;
        }
        current.weights[idx] = 1.0;
        descend(l + 1, candidates, polytope, objective, sense, next_cost, next_resource, current, best, visited);
        current.weights[idx] = 0.0;
    }
}

/// Check a plan against every polytope constraint, naming each violation.
///
/// Row sums and the `[0, 1]` box are tested within `tol`; budgets use the
/// same inclusive test as the solvers ([`fits`]).
pub fn feasibility_check(plan: &Selection, polytope: &SelectionPolytope, tol: f64) -> Verdict {
    let mut violations = Vec::new();
    if plan.dims != polytope.dims {
        violations.push(format!(
            "plan shape {:?} does not match polytope shape {:?}",
            plan.dims, polytope.dims
        ));
        return Verdict { feasible: false, violations };
    }
    let dims = plan.dims;
    let per_loc = dims.types * dims.bands;
    for (l, sum) in plan.row_sums().iter().enumerate() {
        if (sum - 1.0).abs() > tol {
            violations.push(format!("location {l} selection weights sum to {sum}, expected 1"));
        }
    }
    for (idx, &w) in plan.weights.iter().enumerate() {
        let (l, rest) = (idx / per_loc, idx % per_loc);
        let (k, b) = (rest / dims.bands, rest % dims.bands);
        if !(-tol..=1.0 + tol).contains(&w) {
            violations.push(format!("weight {w} at location {l}, type {k}, bandwidth {b} is outside [0, 1]"));
        }
        if w.abs() > tol && !polytope.cell_allowed(idx) {
            violations.push(format!(
                "location {l} puts weight {w} on excluded type {k}, bandwidth {b}"
            ));
        }
    }
    let cost = polytope.cost_of(plan);
    if !fits(cost, polytope.cost_cap) {
        violations.push(format!("deployment cost {cost} exceeds budget {}", polytope.cost_cap));
    }
    let resource = polytope.resource_of(plan);
    if !fits(resource, polytope.resource_cap) {
        violations.push(format!("spectrum use {resource} exceeds budget {}", polytope.resource_cap));
    }
    Verdict { feasible: violations.is_empty(), violations }
}
