//! Dense linear programming over box-bounded variables, plus the selection
//! polytope the planning problems optimize over.
//!
//! The solver is a two-phase revised simplex specialized to the shapes this
//! crate produces: every variable lives in a finite box (`[0, upper]`), all
//! instances are small and dense, and callers need a *certified* bound on the
//! optimum alongside the incumbent, so a near-optimal basis can never
//! masquerade as proof. The certificate comes from weak duality: any
//! sign-feasible multiplier vector bounds the optimum, and at the final basis
//! the bound is tight to roundoff.

use crate::link::LinkDims;
use crate::objective::Selection;
use thiserror::Error;

/// Pivot magnitudes below this are treated as zero during the ratio test and
/// basis updates.
const PIVOT_EPS: f64 = 1e-11;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK_LIMIT: usize = 25;

/// Pivots between basis refactorizations.
const REFACTOR_PERIOD: usize = 64;

/// Errors from the simplex solver.
#[derive(Debug, Error)]
pub enum LpError {
    /// The program's arrays disagree about dimensions or contain non-finite
    /// data.
    #[error("malformed linear program: {0}")]
    Shape(String),
    /// The solver exceeded its iteration budget or lost its basis.
    #[error("simplex failed to converge: {0}")]
    Stalled(String),
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    /// `x` is feasible and optimal to within the solve tolerance.
    Optimal,
    /// No point satisfies the constraints; `x` is meaningless and the values
    /// are the empty infimum/supremum.
    Infeasible,
}

/// A dense linear program over variables boxed to `[0, upper_j]`
/// (`upper_j = 1` unless `upper` is given).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    /// Objective coefficients, one per variable.
    pub objective: Vec<f64>,
    /// Rows of `a_ineq x <= b_ineq`.
    pub a_ineq: Vec<Vec<f64>>,
    pub b_ineq: Vec<f64>,
    /// Rows of `a_eq x = b_eq`.
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    /// Per-variable upper bounds; `None` means all ones.
    pub upper: Option<Vec<f64>>,
}

/// A solved program.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point (clamped into the box).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Certified bound on the true optimum: at most `value` when minimizing,
    /// at least `value` when maximizing, valid regardless of how early the
    /// solver stopped refining.
    pub bound: f64,
    /// Simplex pivots across both phases.
    pub iterations: usize,
}

/// Inclusive budget test with a relative slack of one part in 10^9, so that a
/// total that equals its cap up to accumulated rounding still counts as
/// within budget.
pub fn fits(value: f64, cap: f64) -> bool {
    value <= cap + 1e-9 * cap.abs().max(1.0)
}

struct Simplex {
    m: usize,
    n: usize,
    /// Column-major constraint matrix, `cols[j * m + i]`.
    cols: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    /// Row-major inverse of the basis matrix, `binv[i * m + k]`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    tol: f64,
}

impl Simplex {
    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    /// `w = B^-1 a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.column(j);
        let mut w = vec![0.0; m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            *wi = row.iter().zip(col).map(|(r, c)| r * c).sum();
        }
        w
    }

    /// Row multipliers `y = c_B B^-1` for a cost vector.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &bk) in self.basis.iter().enumerate() {
            let cb = cost[bk];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[k * m..(k + 1) * m];
            for i in 0..m {
                y[i] += cb * row[i];
            }
        }
        y
    }

    /// Rebuild `B^-1` from scratch (Gauss–Jordan with partial pivoting) and
    /// recompute the basic values from the bounds of the nonbasic variables.
    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m]; // row-major basis matrix
        for (k, &j) in self.basis.iter().enumerate() {
            let col = &self.cols[j * m..(j + 1) * m];
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for p in 0..m {
            let (mut best, mut best_row) = (a[p * m + p].abs(), p);
            for r in (p + 1)..m {
                if a[r * m + p].abs() > best {
                    best = a[r * m + p].abs();
                    best_row = r;
                }
            }
            if best <= PIVOT_EPS {
                return Err(LpError::Stalled("singular basis during refactorization".into()));
            }
            if best_row != p {
                for c in 0..m {
                    a.swap(p * m + c, best_row * m + c);
                    inv.swap(p * m + c, best_row * m + c);
                }
            }
            let piv = a[p * m + p];
            for c in 0..m {
                a[p * m + c] /= piv;
                inv[p * m + c] /= piv;
            }
            for r in 0..m {
                if r == p {
                    continue;
                }
                let f = a[r * m + p];
                if f == 0.0 {
                    continue;
                }
                for c in 0..m {
                    a[r * m + c] -= f * a[p * m + c];
                    inv[r * m + c] -= f * inv[p * m + c];
                }
            }
        }
        self.binv = inv;
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = self.b.clone();
        for j in 0..self.n {
            if self.in_basis[j] || !self.at_upper[j] || self.up[j] == 0.0 {
                continue;
            }
            let col = &self.cols[j * m..(j + 1) * m];
            for i in 0..m {
                r[i] -= col[i] * self.up[j];
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
    }

    /// Run the simplex loop to optimality for one cost vector.
    fn optimize(&mut self, cost: &[f64], max_iters: usize) -> Result<(), LpError> {
        let mut degenerate_streak = 0usize;
        let mut since_refactor = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > max_iters {
                return Err(LpError::Stalled(format!(
                    "iteration limit {max_iters} reached"
                )));
            }
            since_refactor += 1;
            if since_refactor >= REFACTOR_PERIOD {
                self.refactorize()?;
                since_refactor = 0;
            }
            let bland = degenerate_streak >= DEGENERATE_STREAK_LIMIT;
            let y = self.duals(cost);

            // pricing
            let mut entering: Option<usize> = None;
            let mut best_violation = self.tol;
            for j in 0..self.n {
                if self.in_basis[j] || self.up[j] <= self.lo[j] {
                    continue;
                }
                let col = &self.cols[j * self.m..(j + 1) * self.m];
                let d = cost[j] - y.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
                let violation = if !self.at_upper[j] && d < -self.tol {
                    -d
                } else if self.at_upper[j] && d > self.tol {
                    d
                } else {
                    continue;
                };
                if bland {
                    entering = Some(j);
                    break;
                }
                if violation > best_violation {
                    best_violation = violation;
                    entering = Some(j);
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };

            let from_lower = !self.at_upper[j];
            let w = self.ftran(j);

            // ratio test: how far the entering variable can move
            let span = self.up[j] - self.lo[j];
            let mut t_best = span;
            let mut leave: Option<(usize, bool)> = None; // (row, leaves at its upper)
            let mut w_best = 0.0;
            for i in 0..self.m {
                let wi = w[i];
                if wi.abs() <= PIVOT_EPS {
                    continue;
                }
                let bi = self.basis[i];
                let decreasing = (from_lower && wi > 0.0) || (!from_lower && wi < 0.0);
                let t_i = if decreasing {
                    (self.xb[i] - self.lo[bi]).max(0.0) / wi.abs()
                } else {
                    if self.up[bi].is_infinite() {
                        continue;
                    }
                    (self.up[bi] - self.xb[i]).max(0.0) / wi.abs()
                };
                let tie = 1e-12 * (1.0 + t_best.min(t_i));
                if t_i < t_best - tie {
                    t_best = t_i;
                    leave = Some((i, !decreasing));
                    w_best = wi.abs();
                } else if t_i <= t_best + tie && leave.is_some() {
                    let better = if bland {
                        self.basis[i] < self.basis[leave.unwrap().0]
                    } else {
                        wi.abs() > w_best
                    };
                    if better {
                        leave = Some((i, !decreasing));
                        w_best = wi.abs();
                    }
                }
            }
            if t_best.is_infinite() {
                return Err(LpError::Stalled(
                    "unbounded ray in a box-bounded program (numerical breakdown)".into(),
                ));
            }

            // apply the move to the basic values
            let step = if from_lower { -t_best } else { t_best };
            for i in 0..self.m {
                self.xb[i] += step * w[i];
            }

            match leave {
                None => {
                    // the entering variable runs to its other bound
                    self.at_upper[j] = !self.at_upper[j];
                    degenerate_streak = 0;
                }
                Some((r, leaves_at_upper)) => {
                    let lv = self.basis[r];
                    self.in_basis[lv] = false;
                    self.at_upper[lv] = leaves_at_upper;
                    self.in_basis[j] = true;
                    self.basis[r] = j;
                    self.xb[r] = if from_lower { self.lo[j] + t_best } else { self.up[j] - t_best };

                    // product-form update of the explicit inverse
                    let m = self.m;
                    let wr = w[r];
                    for c in 0..m {
                        self.binv[r * m + c] /= wr;
                    }
                    for i in 0..m {
                        if i == r {
                            continue;
                        }
                        let f = w[i];
                        if f == 0.0 {
                            continue;
                        }
                        for c in 0..m {
                            self.binv[i * m + c] -= f * self.binv[r * m + c];
                        }
                    }
                    degenerate_streak = if t_best <= 1e-10 { degenerate_streak + 1 } else { 0 };
                }
            }
        }
    }
}

/// Solve a [`LinearProgram`] to optimality.
///
/// `tol` is the absolute reduced-cost threshold (1e-9 suits the problems in
/// this crate). Infeasibility is reported through [`LpStatus::Infeasible`],
/// not an error; errors are reserved for malformed input and numerical
/// breakdown.
pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpSolution, LpError> {
    let n = lp.objective.len();
    for (name, rows, rhs) in
        [("a_ineq", &lp.a_ineq, &lp.b_ineq), ("a_eq", &lp.a_eq, &lp.b_eq)]
    {
        if rows.len() != rhs.len() {
            return Err(LpError::Shape(format!("{name} has {} rows but {} right-hand sides", rows.len(), rhs.len())));
        }
        for row in rows.iter() {
            if row.len() != n {
                return Err(LpError::Shape(format!("{name} row width {} != {n} variables", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Shape(format!("{name} contains non-finite coefficients")));
            }
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Shape(format!("{name} right-hand side is not finite")));
        }
    }
    if lp.objective.iter().any(|v| !v.is_finite()) {
        return Err(LpError::Shape("objective contains non-finite coefficients".into()));
    }
    let upper = match &lp.upper {
        Some(u) => {
            if u.len() != n {
                return Err(LpError::Shape(format!("{} upper bounds for {n} variables", u.len())));
            }
            if u.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(LpError::Shape("upper bounds must be finite and nonnegative".into()));
            }
            u.clone()
        }
        None => vec![1.0; n],
    };

    let minimize = lp.sense == Sense::Minimize;
    let infeasible_value = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    let cost: Vec<f64> =
        lp.objective.iter().map(|&c| if minimize { c } else { -c }).collect();

    let n_ineq = lp.a_ineq.len();
    let n_eq = lp.a_eq.len();
    let m = n_ineq + n_eq;

    if m == 0 {
        // pure box problem: each variable sits at whichever bound helps
        let x: Vec<f64> =
            cost.iter().zip(&upper).map(|(&c, &u)| if c < 0.0 { u } else { 0.0 }).collect();
        let raw: f64 = cost.iter().zip(&x).map(|(c, x)| c * x).sum();
        let value = if minimize { raw } else { -raw };
        return Ok(LpSolution { status: LpStatus::Optimal, x, value, bound: value, iterations: 0 });
    }

    // assemble columns: structural, slacks for inequality rows, then
    // artificials for rows whose slack cannot start feasible
    let mut b = Vec::with_capacity(m);
    b.extend_from_slice(&lp.b_ineq);
    b.extend_from_slice(&lp.b_eq);

    let total_guess = n + n_ineq + m;
    let mut cols = Vec::with_capacity(total_guess * m);
    for j in 0..n {
        for i in 0..n_ineq {
            cols.push(lp.a_ineq[i][j]);
        }
        for i in 0..n_eq {
            cols.push(lp.a_eq[i][j]);
        }
    }
    let mut lo = vec![0.0; n];
    let mut up = upper.clone();
    for i in 0..n_ineq {
        let mut col = vec![0.0; m];
        col[i] = 1.0;
        cols.extend_from_slice(&col);
        lo.push(0.0);
        up.push(f64::INFINITY);
    }

    let mut basis = Vec::with_capacity(m);
    let mut artificials = Vec::new();
    for i in 0..m {
        let is_ineq = i < n_ineq;
        if is_ineq && b[i] >= 0.0 {
            basis.push(n + i); // the slack starts basic
            continue;
        }
        let j = n + n_ineq + artificials.len();
        let mut col = vec![0.0; m];
        col[i] = if b[i] >= 0.0 { 1.0 } else { -1.0 };
        cols.extend_from_slice(&col);
        lo.push(0.0);
        up.push(f64::INFINITY);
        artificials.push(j);
        basis.push(j);
    }
    let n_total = n + n_ineq + artificials.len();

    let mut in_basis = vec![false; n_total];
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut binv = vec![0.0; m * m];
    for (k, &j) in basis.iter().enumerate() {
        // initial basis columns are +/- unit vectors on row k
        binv[k * m + k] = if cols[j * m + k] < 0.0 { -1.0 } else { 1.0 };
    }
    let xb = (0..m).map(|i| b[i].abs()).collect();

    let mut s = Simplex {
        m,
        n: n_total,
        cols,
        lo,
        up,
        b,
        basis,
        in_basis,
        at_upper: vec![false; n_total],
        binv,
        xb,
        iterations: 0,
        tol,
    };
    let max_iters = 2000 + 60 * (n_total + m);

    // phase 1: drive the artificials to zero
    if !artificials.is_empty() {
        let mut phase1 = vec![0.0; n_total];
        for &j in &artificials {
            phase1[j] = 1.0;
        }
        s.optimize(&phase1, max_iters)?;
        s.refactorize()?;
        let infeasibility: f64 = s
            .basis
            .iter()
            .zip(&s.xb)
            .filter(|(j, _)| artificials.contains(j))
            .map(|(_, v)| v.max(0.0))
            .sum();
        let scale = 1.0 + s.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > 1e-7 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                value: infeasible_value,
                bound: infeasible_value,
                iterations: s.iterations,
            });
        }
        for &j in &artificials {
            s.up[j] = 0.0; // never usable again
        }
    }

    // phase 2: the real objective
    let mut phase2 = vec![0.0; n_total];
    phase2[..n].copy_from_slice(&cost);
    s.optimize(&phase2, max_iters)?;
    s.refactorize()?;

    // extract the structural solution
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = if s.at_upper[j] { s.up[j] } else { 0.0 };
    }
    for (k, &j) in s.basis.iter().enumerate() {
        if j < n {
            x[j] = s.xb[k];
        }
    }
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = xj.clamp(0.0, upper[j]);
    }
    let raw_value: f64 = cost.iter().zip(&x).map(|(c, x)| c * x).sum();

    // certified bound by weak duality: clamp the inequality multipliers to
    // their feasible sign, then relax every variable to its best bound
    let mut y = s.duals(&phase2);
    for yi in y.iter_mut().take(n_ineq) {
        *yi = yi.min(0.0);
    }
    let mut raw_bound: f64 = y.iter().zip(&s.b).map(|(a, b)| a * b).sum();
    for j in 0..n {
        let col = s.column(j);
        let d = cost[j] - y.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        raw_bound += (d * upper[j]).min(0.0);
    }

    let (value, bound) = if minimize { (raw_value, raw_bound) } else { (-raw_value, -raw_bound) };
    Ok(LpSolution { status: LpStatus::Optimal, x, value, bound, iterations: s.iterations })
}

/// The feasible set every planning problem optimizes over: one unit of weight
/// per location spread across `(type, bandwidth)` cells, a total deployment
/// cost cap, one spectrum cap, and an optional per-`(type, bandwidth)` mask
/// restricting which cells may carry weight.
#[derive(Debug, Clone)]
pub struct SelectionPolytope {
    pub dims: LinkDims,
    /// Per-cell deployment cost.
    costs: Vec<f64>,
    pub cost_cap: f64,
    /// Per-cell spectrum use (channel counts or hertz, caller's choice).
    resource: Vec<f64>,
    pub resource_cap: f64,
    /// Per-cell availability, expanded from the `(type, bandwidth)` mask.
    allowed: Vec<bool>,
}

impl SelectionPolytope {
    /// Build the polytope. `costs` and `resource` are per-cell totals in link
    /// table order; `mask`, when given, has one entry per `(type, bandwidth)`
    /// pair (applied uniformly across locations) and must keep the empty cell
    /// `(0, 0)` available so the polytope is never empty.
    pub fn new(
        dims: LinkDims,
        costs: Vec<f64>,
        cost_cap: f64,
        resource: Vec<f64>,
        resource_cap: f64,
        mask: Option<&[bool]>,
    ) -> Self {
        assert_eq!(costs.len(), dims.cells());
        assert_eq!(resource.len(), dims.cells());
        assert!(cost_cap >= 0.0 && resource_cap >= 0.0);
        let per_loc = dims.types * dims.bands;
        let allowed = match mask {
            Some(pattern) => {
                assert_eq!(pattern.len(), per_loc, "mask covers every (type, bandwidth) pair");
                assert!(pattern[0], "the empty assignment (type 0, bandwidth 0) must stay available");
                let mut full = Vec::with_capacity(dims.cells());
                for _ in 0..dims.locations {
                    full.extend_from_slice(pattern);
                }
                full
            }
            None => vec![true; dims.cells()],
        };
        SelectionPolytope { dims, costs, cost_cap, resource, resource_cap, allowed }
    }

    /// Total deployment cost of a plan.
    pub fn cost_of(&self, s: &Selection) -> f64 {
        s.weights.iter().zip(&self.costs).map(|(a, b)| a * b).sum()
    }

    /// Total spectrum use of a plan.
    pub fn resource_of(&self, s: &Selection) -> f64 {
        s.weights.iter().zip(&self.resource).map(|(a, b)| a * b).sum()
    }

    /// Deployment cost of one unit of weight at flat cell index `idx`.
    pub fn cell_cost(&self, idx: usize) -> f64 {
        self.costs[idx]
    }

    /// Spectrum use of one unit of weight at flat cell index `idx`.
    pub fn cell_resource(&self, idx: usize) -> f64 {
        self.resource[idx]
    }

    /// Whether the cell at flat index `idx` may carry weight.
    pub fn cell_allowed(&self, idx: usize) -> bool {
        self.allowed[idx]
    }

    /// Build a linear program over this polytope with the given objective,
    /// plus optional extra inequality rows `(coeffs, rhs)`.
    pub fn lp(&self, sense: Sense, objective: Vec<f64>, extra_ineq: &[(Vec<f64>, f64)]) -> LinearProgram {
        let cells = self.dims.cells();
        assert_eq!(objective.len(), cells);
        let per_loc = self.dims.types * self.dims.bands;

        let mut a_eq = Vec::with_capacity(self.dims.locations);
        for l in 0..self.dims.locations {
            let mut row = vec![0.0; cells];
            row[l * per_loc..(l + 1) * per_loc].fill(1.0);
            a_eq.push(row);
        }
        let b_eq = vec![1.0; self.dims.locations];

        // normalize the budget rows to unit right-hand sides for conditioning
        let mut a_ineq = Vec::with_capacity(2 + extra_ineq.len());
        let mut b_ineq = Vec::with_capacity(2 + extra_ineq.len());
        for (per_cell, cap) in [(&self.costs, self.cost_cap), (&self.resource, self.resource_cap)] {
            if cap > 0.0 {
                a_ineq.push(per_cell.iter().map(|v| v / cap).collect());
                b_ineq.push(1.0);
            } else {
                a_ineq.push(per_cell.clone());
                b_ineq.push(0.0);
            }
        }
        for (row, rhs) in extra_ineq {
            assert_eq!(row.len(), cells);
            a_ineq.push(row.clone());
            b_ineq.push(*rhs);
        }

        let upper = self.allowed.iter().map(|&ok| if ok { 1.0 } else { 0.0 }).collect();
        LinearProgram { sense, objective, a_ineq, b_ineq, a_eq, b_eq, upper: Some(upper) }
    }

    /// Linear minimization oracle: the vertex of the polytope minimizing
    /// `<direction, s>`. The polytope always contains the empty plan, so a
    /// feasible vertex always exists.
    pub fn lmo(&self, direction: &[f64], tol: f64) -> Result<Selection, LpError> {
        let lp = self.lp(Sense::Minimize, direction.to_vec(), &[]);
        let sol = solve_lp(&lp, tol)?;
        if sol.status != LpStatus::Optimal {
            return Err(LpError::Stalled(
                "selection polytope reported infeasible, but it contains the empty plan".into(),
            ));
        }
        Ok(Selection { dims: self.dims, weights: sol.x })
    }

    /// Whether a plan satisfies every polytope constraint: unit row sums
    /// (within `tol`), the box, the mask, and both budgets (inclusive per
    /// [`fits`]).
    pub fn contains(&self, s: &Selection, tol: f64) -> bool {
        if s.dims != self.dims {
            return false;
        }
        if s.weights.iter().any(|&w| !(-tol..=1.0 + tol).contains(&w)) {
            return false;
        }
        if s.weights.iter().zip(&self.allowed).any(|(&w, &ok)| !ok && w.abs() > tol) {
            return false;
        }
        if s.row_sums().iter().any(|&r| (r - 1.0).abs() > tol) {
            return false;
        }
        fits(self.cost_of(s), self.cost_cap) && fits(self.resource_of(s), self.resource_cap)
    }
}
