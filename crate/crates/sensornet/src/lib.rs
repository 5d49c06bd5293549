//! Planning engine for energy-harvesting IoT sensor networks.
//!
//! Given a field of candidate sensing locations, a catalog of sensor power
//! classes, and a set of transmission bandwidths, this crate selects where to
//! place sensors, which class to deploy, and how much spectrum each one gets,
//! so that the source-estimation error at a fusion center is minimized under
//! cost and spectrum budgets.
//!
//! The pipeline is:
//!
//! 1. [`scenario`] — world model: geometry, harvesting, budgets, priors.
//! 2. [`link`] — per-(location, class, bandwidth) transmission physics:
//!    powers, SNRs, equivalent noise variances for the analog and digital
//!    uplink schemes.
//! 3. [`objective`] — estimation-error objectives: A-optimal error trace for
//!    static vector sources, steady-state Kalman error for a dynamic scalar
//!    source.
//! 4. [`lp`] — a self-contained bounded-variable simplex solver and the
//!    linear-minimization oracle over the selection polytope.
//! 5. [`relax`] — the relaxed convex programs (Frank–Wolfe for the static
//!    traces, direct LPs for the dynamic objectives) with certified bounds.
//! 6. [`rounding`] — randomized rounding of fractional selections to feasible
//!    Boolean ones, plus an exhaustive-search oracle.
//! 7. [`montecarlo`] — seeded simulation of the full measure-transmit-estimate
//!    chain to validate the analytic error predictions.
//! 8. [`pipeline`] — budget sweeps, model self-checks, and CSV/JSON reporting;
//!    the `sensornet` binary is a thin CLI over this module.
//!
//! Everything downstream of scenario loading is deterministic given the
//! configured seeds.

pub mod link;
pub mod lp;
pub mod montecarlo;
pub mod objective;
pub mod pipeline;
pub mod relax;
pub mod rounding;
pub mod scenario;
