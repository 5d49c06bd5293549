//! Estimation objectives: what a candidate plan is worth.
//!
//! A plan is a [`Selection`]: one weight per `(location, type, bandwidth)`
//! cell, each location's weights summing to one (type 0 being "leave it
//! empty"). For fractional weights the objectives below are the relaxed
//! surrogates the solvers optimize; for 0/1 weights they are the exact error
//! of the deployed network.
//!
//! Two estimation settings share the machinery:
//! * **static**: a Gaussian vector source estimated once per interval; the
//!   figure of merit is the trace of the posterior covariance,
//!   [`StaticObjective`].
//! * **dynamic**: a scalar Gauss–Markov source tracked by a Kalman filter; the
//!   figure of merit is the steady-state filtering variance, a closed-form
//!   function of the total per-interval information ([`steady_state_mmse`]).

use crate::link::LinkTable;
use crate::scenario::Scenario;
use thiserror::Error;

/// Errors from objective construction and evaluation.
#[derive(Debug, Error)]
pub enum ObjectiveError {
    /// Scalar information weights only exist for single-source scenarios.
    #[error("scalar information weights need exactly one source, got {0}")]
    MultiSource(usize),
    /// The prior covariance failed its Cholesky factorization.
    #[error("prior covariance is not positive definite")]
    NotPositiveDefinite,
    /// A requested error target is outside the achievable range.
    #[error("error target {target} is outside (0, {max}]: {reason}")]
    TargetOutOfRange { target: f64, max: f64, reason: &'static str },
}

/// How sensors forward their measurements to the fusion center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Amplify-and-forward over one resource channel.
    Analog,
    /// Quantize-and-transmit over the selected bandwidth.
    Digital,
}

/// A (possibly fractional) deployment plan: weight `s_{l,k,b} >= 0` on every
/// cell, with each location's weights summing to one.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Selection {
    pub dims: crate::link::LinkDims,
    /// Flat weights indexed like the link table (lexicographic `(l, k, b)`).
    pub weights: Vec<f64>,
}

impl Selection {
    /// The plan that spreads each location's weight uniformly over all cells.
    pub fn uniform(dims: crate::link::LinkDims) -> Self {
        let per_cell = 1.0 / (dims.types * dims.bands) as f64;
        Selection { dims, weights: vec![per_cell; dims.cells()] }
    }

    /// The 0/1 plan that puts type `k` with bandwidth `b` at each location,
    /// given one `(k, b)` pair per location.
    pub fn from_assignment(dims: crate::link::LinkDims, assignment: &[(usize, usize)]) -> Self {
        assert_eq!(assignment.len(), dims.locations, "one (type, band) pair per location");
        let mut weights = vec![0.0; dims.cells()];
        for (l, &(k, b)) in assignment.iter().enumerate() {
            weights[dims.idx(l, k, b)] = 1.0;
        }
        Selection { dims, weights }
    }

    /// Flat index of cell `(l, k, b)`.
    pub fn idx(&self, l: usize, k: usize, b: usize) -> usize {
        self.dims.idx(l, k, b)
    }

    /// Weight totals per location (exactly one for a valid plan).
    pub fn row_sums(&self) -> Vec<f64> {
        let row = self.dims.types * self.dims.bands;
        (0..self.dims.locations)
            .map(|l| self.weights[l * row..(l + 1) * row].iter().sum())
            .collect()
    }

    /// True when every weight is within `tol` of 0 or 1.
    pub fn is_boolean(&self, tol: f64) -> bool {
        self.weights.iter().all(|&w| w.abs() <= tol || (w - 1.0).abs() <= tol)
    }

    /// The `(k, b)` pair per location if the plan is (numerically) 0/1,
    /// reading any weight above one half as the selected cell.
    pub fn assignment(&self) -> Option<Vec<(usize, usize)>> {
        if !self.is_boolean(1e-6) {
            return None;
        }
        let mut out = Vec::with_capacity(self.dims.locations);
        for l in 0..self.dims.locations {
            let mut hit = None;
            for k in 0..self.dims.types {
                for b in 0..self.dims.bands {
                    if self.weights[self.dims.idx(l, k, b)] > 0.5 {
                        if hit.is_some() {
                            return None;
                        }
                        hit = Some((k, b));
                    }
                }
            }
            out.push(hit?);
        }
        Some(out)
    }
}

/// Per-cell precision `1 / sigma^2` of the chosen scheme's end-to-end noise.
/// Type 0 cells contribute exactly zero (their noise is the infinite
/// sentinel), as do cells whose link cannot close.
pub fn channel_precisions(table: &LinkTable, scheme: Scheme) -> Vec<f64> {
    let vars = match scheme {
        Scheme::Analog => &table.analog_vars,
        Scheme::Digital => &table.digital_vars,
    };
    vars.iter().map(|&v| if v.is_finite() { 1.0 / v } else { 0.0 }).collect()
}

/// Per-cell scalar information `h_l^2 / sigma^2`: the Fisher information one
/// interval of that cell contributes about a single source. Only defined for
/// single-source scenarios.
pub fn info_weights(table: &LinkTable, scheme: Scheme) -> Result<Vec<f64>, ObjectiveError> {
    if table.sources != 1 {
        return Err(ObjectiveError::MultiSource(table.sources));
    }
    let precisions = channel_precisions(table, scheme);
    let mut out = vec![0.0; table.dims.cells()];
    for l in 0..table.dims.locations {
        let h = table.measurement_gains[l];
        for k in 0..table.dims.types {
            for b in 0..table.dims.bands {
                let i = table.dims.idx(l, k, b);
                out[i] = h * h * precisions[i];
            }
        }
    }
    Ok(out)
}

/// Plan-weighted total of a per-cell quantity (information, cost, spectrum).
pub fn weighted_total(selection: &Selection, per_cell: &[f64]) -> f64 {
    assert_eq!(selection.weights.len(), per_cell.len());
    selection.weights.iter().zip(per_cell).map(|(s, w)| s * w).sum()
}

/// Dense Cholesky solver for the small SPD systems the objectives need
/// (dimension = number of sources).
pub(crate) struct SpdSolver {
    n: usize,
    /// Lower-triangular factor, row-major.
    l: Vec<f64>,
}

impl SpdSolver {
    /// Factor a row-major `n x n` SPD matrix; `None` if it is not SPD.
    pub(crate) fn new(a: &[f64], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(SpdSolver { n, l })
    }

    /// Solve `A x = rhs` in place.
    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }

    /// `L z` for the stored factor `A = L L^T`: maps iid standard normals
    /// onto samples with covariance `A`.
    pub(crate) fn correlate(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(z.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.l[i * n + k] * z[k];
            }
            out[i] = s;
        }
        out
    }

    /// `tr(A^-1)`, the squared Frobenius norm of the inverse factor.
    pub(crate) fn inverse_trace(&self) -> f64 {
        let n = self.n;
        // columns of L^-1 by forward substitution; tr(A^-1) = ||L^-1||_F^2
        let mut total = 0.0;
        let mut col = vec![0.0; n];
        for j in 0..n {
            for x in col.iter_mut() {
                *x = 0.0;
            }
            for i in j..n {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in j..i {
                    s -= self.l[i * n + k] * col[k];
                }
                col[i] = s / self.l[i * n + i];
                total += col[i] * col[i];
            }
        }
        total
    }
}

/// The static estimation objective: trace of the posterior covariance of the
/// source vector after fusing one interval of measurements under a plan.
pub struct StaticObjective<'a> {
    table: &'a LinkTable,
    /// Per-cell precisions of the chosen scheme.
    precisions: Vec<f64>,
    /// Inverse prior covariance, row-major `m x m`.
    prior_inv: Vec<f64>,
    prior_trace: f64,
    m: usize,
}

impl<'a> StaticObjective<'a> {
    pub fn new(
        scenario: &Scenario,
        table: &'a LinkTable,
        scheme: Scheme,
    ) -> Result<Self, ObjectiveError> {
        let m = scenario.n_sources();
        let mut prior = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                prior[i * m + j] = scenario.static_prior[i][j];
            }
        }
        let chol = SpdSolver::new(&prior, m).ok_or(ObjectiveError::NotPositiveDefinite)?;
        let mut prior_inv = vec![0.0; m * m];
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            chol.solve_in_place(&mut e);
            for i in 0..m {
                prior_inv[i * m + j] = e[i];
            }
        }
        let prior_trace = (0..m).map(|i| prior[i * m + i]).sum();
        Ok(StaticObjective {
            table,
            precisions: channel_precisions(table, scheme),
            prior_inv,
            prior_trace,
            m,
        })
    }

    /// Trace of the prior covariance: the objective value of the empty plan,
    /// and the natural scale for convergence tolerances.
    pub fn prior_trace(&self) -> f64 {
        self.prior_trace
    }

    /// Per-cell precisions of the scheme this objective was built for.
    pub fn precisions(&self) -> &[f64] {
        &self.precisions
    }

    /// Total precision each location contributes under a plan.
    pub fn location_precisions(&self, selection: &Selection) -> Vec<f64> {
        let dims = &self.table.dims;
        let mut u = vec![0.0; dims.locations];
        for l in 0..dims.locations {
            let row = l * dims.types * dims.bands;
            let mut acc = 0.0;
            for c in 0..dims.types * dims.bands {
                acc += selection.weights[row + c] * self.precisions[row + c];
            }
            u[l] = acc;
        }
        u
    }

    fn information_matrix(&self, u: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut f = self.prior_inv.clone();
        for (l, &ul) in u.iter().enumerate() {
            if ul == 0.0 {
                continue;
            }
            let h = &self.table.measurement_gains[l * m..(l + 1) * m];
            for i in 0..m {
                for j in 0..m {
                    f[i * m + j] += ul * h[i] * h[j];
                }
            }
        }
        f
    }

    /// Objective value given per-location precisions.
    pub fn value_at_precisions(&self, u: &[f64]) -> f64 {
        let f = self.information_matrix(u);
        SpdSolver::new(&f, self.m)
            .expect("information matrix dominates an SPD prior inverse")
            .inverse_trace()
    }

    /// Objective value of a plan.
    pub fn value(&self, selection: &Selection) -> f64 {
        self.value_at_precisions(&self.location_precisions(selection))
    }

    /// Per-location sensitivity `||F^-1 h_l||^2`: how fast the objective falls
    /// per unit of additional precision at location `l`.
    pub fn sensitivities(&self, u: &[f64]) -> Vec<f64> {
        let m = self.m;
        let f = self.information_matrix(u);
        let chol = SpdSolver::new(&f, m).expect("information matrix dominates an SPD prior inverse");
        let mut out = Vec::with_capacity(u.len());
        let mut y = vec![0.0; m];
        for l in 0..u.len() {
            y.copy_from_slice(&self.table.measurement_gains[l * m..(l + 1) * m]);
            chol.solve_in_place(&mut y);
            out.push(y.iter().map(|v| v * v).sum());
        }
        out
    }

    /// Gradient of the objective with respect to every cell weight:
    /// `-precision_{l,k,b} * ||F^-1 h_l||^2`.
    pub fn gradient(&self, selection: &Selection) -> Vec<f64> {
        let u = self.location_precisions(selection);
        let sens = self.sensitivities(&u);
        let dims = &self.table.dims;
        let mut g = vec![0.0; dims.cells()];
        for l in 0..dims.locations {
            let row = l * dims.types * dims.bands;
            for c in 0..dims.types * dims.bands {
                g[row + c] = -self.precisions[row + c] * sens[l];
            }
        }
        g
    }

    /// Objective value and gradient in one factorization pass.
    pub fn value_and_gradient(&self, selection: &Selection) -> (f64, Vec<f64>) {
        (self.value(selection), self.gradient(selection))
    }
}

/// Steady-state variance of the scalar Kalman filter tracking
/// `theta[t] = a theta[t-1] + u[t]`, `u ~ N(0, drive_var)`, when every
/// interval delivers total information `info` (summed `h^2 / sigma^2`).
///
/// This is the stable root of
/// `a^2 info M^2 + (1 + drive_var * info - a^2) M - drive_var = 0`, evaluated
/// in the cancellation-free form that stays finite for `info = 0` (where it
/// reduces to the stationary variance) and `a = 0`.
pub fn steady_state_mmse(info: f64, a: f64, drive_var: f64) -> f64 {
    assert!(info >= 0.0, "information is nonnegative");
    assert!(a.abs() < 1.0, "the source must be stable");
    assert!(drive_var > 0.0, "the source must be driven");
    let beta = 1.0 + drive_var * info - a * a;
    2.0 * drive_var / (beta + (beta * beta + 4.0 * a * a * info * drive_var).sqrt())
}

/// The same steady state reached by iterating the filter recursion
/// (predict `M_p = a^2 M + drive_var`, update `M = M_p / (1 + info * M_p)`)
/// from the stationary variance. Returns the fixed point and the number of
/// iterations taken to reach relative step `tol`.
pub fn riccati_mmse(info: f64, a: f64, drive_var: f64, tol: f64, max_iter: usize) -> (f64, usize) {
    assert!(a.abs() < 1.0 && drive_var > 0.0);
    let mut m = drive_var / (1.0 - a * a);
    for it in 0..max_iter {
        let mp = a * a * m + drive_var;
        let next = mp / (1.0 + info * mp);
        let done = (next - m).abs() <= tol * next.abs();
        m = next;
        if done {
            return (m, it + 1);
        }
    }
    (m, max_iter)
}

/// Minimum per-interval information that drives the steady-state filtering
/// variance down to `target`: the inverse of [`steady_state_mmse`],
/// `(drive_var - (1 - a^2) xi) / (a^2 xi^2 + drive_var * xi)`.
///
/// `target` must lie in `(0, stationary]`; anything above the stationary
/// variance needs no sensing at all and anything nonpositive is unreachable.
pub fn info_bound_for_error(target: f64, a: f64, drive_var: f64) -> Result<f64, ObjectiveError> {
    assert!(a.abs() < 1.0 && drive_var > 0.0);
    let stationary = drive_var / (1.0 - a * a);
    if !(target > 0.0) {
        return Err(ObjectiveError::TargetOutOfRange {
            target,
            max: stationary,
            reason: "no finite information reaches a nonpositive error",
        });
    }
    if target > stationary {
        return Err(ObjectiveError::TargetOutOfRange {
            target,
            max: stationary,
            reason: "the source never exceeds its stationary variance",
        });
    }
    Ok((drive_var - (1.0 - a * a) * target) / (a * a * target * target + drive_var * target))
}
