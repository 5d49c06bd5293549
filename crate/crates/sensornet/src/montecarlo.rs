//! Seeded Monte Carlo validation of the analytic error predictions.
//!
//! The solvers trust closed-form error expressions: the posterior trace for
//! static sources and the steady-state Kalman error for the tracked one.
//! This module re-derives those numbers the hard way — by simulating the
//! full measure-amplify/quantize-transmit-estimate chain — so a disagreement
//! flags a bookkeeping bug somewhere between the link budget and the
//! objective algebra.
//!
//! Each simulated interval runs the physical chain stage by stage:
//!
//! 1. every deployed sensor measures `x_l = h_l' theta + v_l` with Gaussian
//!    measurement noise;
//! 2. **analog** sensors scale the measurement to their per-channel power
//!    and forward it; the fusion center receives it through the uplink gain
//!    plus Gaussian thermal noise and undoes the known scaling. **Digital**
//!    sensors quantize instead: the quantization error of a dithered uniform
//!    quantizer with `Q` usable levels is uniform on `±sqrt(3) sigma_x / Q`,
//!    which realizes exactly the modeled noise power `sigma_x^2 / Q^2` — and
//!    being non-Gaussian, it also exercises the fact that the linear
//!    estimator's error depends on second moments only;
//! 3. the fusion center runs the matched linear estimator: batch linear
//!    minimum-mean-square-error fusion for static sources, the information
//!    form of the scalar Kalman filter for the tracked source.
//!
//! Sensors whose link cannot close (zero effective precision) are skipped by
//! the estimator, exactly as the objectives count them.
//!
//! Determinism: trial `t` draws from `ChaCha8` stream `t` of the given seed,
//! so reports are reproducible and independent of trial scheduling, and
//! growing the trial count extends rather than reshuffles the sample set.
//! Means and variances are accumulated with pairwise summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::link::LinkTable;
use crate::objective::{steady_state_mmse, Scheme, Selection, SpdSolver};
use crate::scenario::Scenario;

/// Default number of independent trials.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Default trajectory length, in intervals, for dynamic simulations.
pub const DEFAULT_INTERVALS: usize = 1_000;
/// Default fraction of each trajectory discarded as filter burn-in.
pub const DEFAULT_BURN_IN: f64 = 0.2;
/// Default confidence multiplier (two-sided 95% for a normal sampling law).
pub const DEFAULT_Z: f64 = 1.96;

/// Simulation failure modes.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// Simulation deploys real sensors, so the plan must pick exactly one
    /// cell per location.
    #[error("the plan must be boolean (one cell per location) to simulate")]
    FractionalPlan,
    /// Tracking simulations are defined for a single source.
    #[error("dynamic simulation tracks a single source, but the scenario has {0}")]
    MultiSource(usize),
    /// The trial/interval counts leave nothing to average.
    #[error("no samples to average: {0}")]
    NoSamples(String),
    /// The static prior covariance is not positive definite.
    #[error("the static prior covariance is not positive definite")]
    BadPrior,
}

/// Monte Carlo controls. `Default` gives the documented defaults.
#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Independent trials (static: one snapshot each; dynamic: one
    /// trajectory each).
    pub trials: usize,
    /// Intervals per trajectory (dynamic only).
    pub intervals: usize,
    /// Fraction of each trajectory discarded before errors are recorded,
    /// in `[0, 1)` (dynamic only).
    pub burn_in: f64,
    /// Confidence-interval multiplier for the reported half-width.
    pub z: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            trials: DEFAULT_TRIALS,
            intervals: DEFAULT_INTERVALS,
            burn_in: DEFAULT_BURN_IN,
            z: DEFAULT_Z,
        }
    }
}

/// The verdict of a simulation run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimReport {
    /// Analytic error prediction for the simulated plan.
    pub predicted: f64,
    /// Empirical mean squared estimation error.
    pub empirical_mse: f64,
    /// Confidence half-width of `empirical_mse` (z times the standard error
    /// over independent trials).
    pub ci_halfwidth: f64,
    /// Independent trials contributing to the estimate.
    pub trials: usize,
    /// Total error samples (trials for static runs, trials times kept
    /// intervals for dynamic ones).
    pub samples: usize,
}

impl SimReport {
    /// Empirical-vs-predicted discrepancy relative to the prediction.
    pub fn relative_error(&self) -> f64 {
        (self.empirical_mse - self.predicted).abs() / self.predicted.abs().max(f64::MIN_POSITIVE)
    }

    /// Whether the prediction sits inside the empirical confidence interval.
    pub fn within_ci(&self) -> bool {
        (self.empirical_mse - self.predicted).abs() <= self.ci_halfwidth
    }
}

/// One deployed sensor, reduced to what the simulation needs.
struct SimSensor {
    /// Measurement gains toward each source.
    gains: Vec<f64>,
    /// Measurement noise standard deviation.
    meas_std: f64,
    /// Effective end-to-end precision the estimator assigns this sensor.
    precision: f64,
    /// Transmission stage.
    chain: Chain,
}

enum Chain {
    /// Scale to per-channel power (`amp`), pass through the uplink amplitude
    /// gain, add thermal noise, undo the known scaling.
    Analog { amp: f64, gain_sqrt: f64, noise_std: f64 },
    /// Add dithered-quantizer error, uniform on `±half_width`.
    Digital { half_width: f64 },
}

impl SimSensor {
    /// Run one measurement through the chain: returns what the fusion
    /// center reconstructs for this sensor.
    fn observe(&self, theta: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        let mut x: f64 = self.gains.iter().zip(theta).map(|(h, t)| h * t).sum();
        let v: f64 = rng.sample(StandardNormal);
        x += self.meas_std * v;
        match self.chain {
            Chain::Analog { amp, gain_sqrt, noise_std } => {
                let received = gain_sqrt * amp * x + noise_std * rng.sample::<f64, _>(StandardNormal);
                received / (gain_sqrt * amp)
            }
            Chain::Digital { half_width } => {
                if half_width > 0.0 {
                    x + rng.gen_range(-half_width..half_width)
                } else {
                    x
                }
            }
        }
    }
}

/// Collect the deployed sensors of a Boolean plan under the given scheme.
/// Sensors with zero effective precision (links that cannot close) never
/// reach the estimator, so they are dropped here too — their `observe`
/// stages would divide by a zero amplifier gain.
fn deployed_sensors(
    table: &LinkTable,
    plan: &Selection,
    scheme: Scheme,
    time_channels: f64,
) -> Result<Vec<SimSensor>, SimError> {
    let assignment = plan.assignment().ok_or(SimError::FractionalPlan)?;
    let dims = table.dims;
    let m = table.sources;
    let mut sensors = Vec::new();
    for (l, &(k, b)) in assignment.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let i = dims.idx(l, k, b);
        let effective_var = match scheme {
            Scheme::Analog => table.analog_vars[i],
            Scheme::Digital => table.digital_vars[i],
        };
        if !effective_var.is_finite() {
            continue;
        }
        let chain = match scheme {
            Scheme::Analog => {
                let p_analog = table.node_powers[l * dims.types + k] * time_channels;
                Chain::Analog {
                    amp: (p_analog / table.signal_vars[l]).sqrt(),
                    gain_sqrt: table.channel_gains[l].sqrt(),
                    noise_std: table.receiver_noise.sqrt(),
                }
            }
            Scheme::Digital => Chain::Digital {
                // Uniform on ±a has variance a^2 / 3.
                half_width: (3.0 * table.quant_vars[i]).sqrt(),
            },
        };
        sensors.push(SimSensor {
            gains: table.measurement_gains[l * m..(l + 1) * m].to_vec(),
            meas_std: table.measurement_var.sqrt(),
            precision: 1.0 / effective_var,
            chain,
        });
    }
    Ok(sensors)
}

/// Simulate the static chain under analog forwarding and compare the
/// empirical estimation error with the posterior-trace prediction.
pub fn simulate_static_analog(
    scenario: &Scenario,
    table: &LinkTable,
    plan: &Selection,
    seed: u64,
    options: &SimOptions,
) -> Result<SimReport, SimError> {
    simulate_static(scenario, table, plan, Scheme::Analog, seed, options)
}

/// Simulate the static chain under digital (quantize-and-transmit)
/// transmission and compare with the posterior-trace prediction.
pub fn simulate_static_digital(
    scenario: &Scenario,
    table: &LinkTable,
    plan: &Selection,
    seed: u64,
    options: &SimOptions,
) -> Result<SimReport, SimError> {
    simulate_static(scenario, table, plan, Scheme::Digital, seed, options)
}

fn simulate_static(
    scenario: &Scenario,
    table: &LinkTable,
    plan: &Selection,
    scheme: Scheme,
    seed: u64,
    options: &SimOptions,
) -> Result<SimReport, SimError> {
    if options.trials == 0 {
        return Err(SimError::NoSamples("trials must be >= 1".into()));
    }
    let m = table.sources;
    let sensors = deployed_sensors(table, plan, scheme, scenario.grid.time_channels as f64)?;

    // Factor the prior once for sampling, and the posterior information
    // matrix once for estimation; its inverse trace is the prediction.
    let prior_flat: Vec<f64> = scenario.static_prior.iter().flatten().copied().collect();
    let prior_chol = SpdSolver::new(&prior_flat, m).ok_or(SimError::BadPrior)?;
    let mut info = vec![0.0; m * m];
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        prior_chol.solve_in_place(&mut e);
        info[i * m..(i + 1) * m].copy_from_slice(&e);
    }
    for sensor in &sensors {
        for i in 0..m {
            for j in 0..m {
                info[i * m + j] += sensor.precision * sensor.gains[i] * sensor.gains[j];
            }
        }
    }
    let posterior = SpdSolver::new(&info, m).ok_or(SimError::BadPrior)?;
    let predicted = posterior.inverse_trace();

    let mut errors = Vec::with_capacity(options.trials);
    for trial in 0..options.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);

        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let theta = prior_chol.correlate(&z);

        // Accumulate the information-weighted measurements and solve for
        // the linear minimum-mean-square-error estimate (prior mean zero).
        let mut rhs = vec![0.0; m];
        for sensor in &sensors {
            let reconstructed = sensor.observe(&theta, &mut rng);
            for (r, h) in rhs.iter_mut().zip(&sensor.gains) {
                *r += sensor.precision * h * reconstructed;
            }
        }
        posterior.solve_in_place(&mut rhs);

        let sq: f64 = theta.iter().zip(&rhs).map(|(t, e)| (t - e) * (t - e)).sum();
        errors.push(sq);
    }

    let (empirical_mse, ci_halfwidth) = mean_and_ci(&errors, options.z);
    Ok(SimReport {
        predicted,
        empirical_mse,
        ci_halfwidth,
        trials: options.trials,
        samples: options.trials,
    })
}

/// Simulate trajectories of the scalar tracked source under the given
/// scheme, run the information-form Kalman filter at the fusion center, and
/// compare the post-burn-in empirical error with the steady-state
/// prediction.
///
/// The confidence interval is computed over per-trajectory mean errors —
/// errors within one trajectory are correlated, trajectories are not.
pub fn simulate_dynamic(
    scenario: &Scenario,
    table: &LinkTable,
    plan: &Selection,
    scheme: Scheme,
    seed: u64,
    options: &SimOptions,
) -> Result<SimReport, SimError> {
    if table.sources != 1 {
        return Err(SimError::MultiSource(table.sources));
    }
    if options.trials == 0 {
        return Err(SimError::NoSamples("trials must be >= 1".into()));
    }
    let skip = (options.burn_in * options.intervals as f64).floor() as usize;
    if skip >= options.intervals {
        return Err(SimError::NoSamples(format!(
            "burn-in {} discards all {} intervals",
            options.burn_in, options.intervals
        )));
    }
    let kept = options.intervals - skip;
    let sensors = deployed_sensors(table, plan, scheme, scenario.grid.time_channels as f64)?;

    let prior = &scenario.dynamic_prior;
    let (a, drive_var) = (prior.a, prior.drive_var);
    let drive_std = drive_var.sqrt();
    let stationary = prior.stationary_var();
    let total_info: f64 = sensors.iter().map(|s| s.precision * s.gains[0] * s.gains[0]).sum();
    let predicted = steady_state_mmse(total_info, a, drive_var);

    let mut trial_means = Vec::with_capacity(options.trials);
    for trial in 0..options.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);

        let mut theta =
            prior.initial_mean + stationary.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut mean = prior.initial_mean;
        let mut var = stationary;

        let mut errors = Vec::with_capacity(kept);
        for t in 0..options.intervals {
            // Source evolves, then the network observes the new state.
            theta = a * theta + drive_std * rng.sample::<f64, _>(StandardNormal);
            let mean_pred = a * mean;
            let var_pred = a * a * var + drive_var;

            let info = 1.0 / var_pred + total_info;
            let mut rhs = mean_pred / var_pred;
            for sensor in &sensors {
                let reconstructed = sensor.observe(std::slice::from_ref(&theta), &mut rng);
                rhs += sensor.precision * sensor.gains[0] * reconstructed;
            }
            var = 1.0 / info;
            mean = rhs * var;

            if t >= skip {
                errors.push((theta - mean) * (theta - mean));
            }
        }
        trial_means.push(pairwise_sum(&errors) / errors.len() as f64);
    }

    let (empirical_mse, ci_halfwidth) = mean_and_ci(&trial_means, options.z);
    Ok(SimReport {
        predicted,
        empirical_mse,
        ci_halfwidth,
        trials: options.trials,
        samples: options.trials * kept,
    })
}

/// Numerically careful sum: pairwise splitting keeps the rounding error
/// growth logarithmic in the sample count.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sample mean and `z`-scaled standard error of the mean.
fn mean_and_ci(samples: &[f64], z: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = pairwise_sum(samples) / n;
    if samples.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let devs: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&devs) / (n - 1.0);
    (mean, z * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkTable;
    use crate::objective::StaticObjective;
    use crate::scenario::{
        Band, BaseStation, Budgets, Diffusion, DynamicPrior, Field, Noise, Point, Power,
        ResourceGrid, Scenario, SensorType,
    };

    /// Effective noise temperature putting the per-channel receiver noise at
    /// exactly 1e-9 W for a 10 kHz channel.
    const TEST_TEMPERATURE: f64 = 7242702976.750924;

    fn test_scenario(sources: Vec<Point>, prior: Vec<Vec<f64>>) -> Scenario {
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
            sources,
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
            budgets: Budgets { cost: 100.0, bandwidth: 1e6, channels: 100 },
            noise: Noise { measurement_var: 1.0, temperature: TEST_TEMPERATURE },
            static_prior: prior,
            dynamic_prior: DynamicPrior { a: 0.6, drive_var: 2.0, initial_mean: 0.0 },
        };
        s.validate().expect("test scenario must validate");
        s
    }

    fn single_source() -> Scenario {
        test_scenario(vec![Point::new(200.0, 220.0)], vec![vec![2.0]])
    }

    fn two_sensor_plan(table: &LinkTable) -> Selection {
        Selection::from_assignment(table.dims, &[(2, 0), (0, 0), (1, 0), (0, 0)])
    }

    #[test]
    fn analog_simulation_matches_prediction() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = two_sensor_plan(&table);
        let report = simulate_static_analog(
            &scenario,
            &table,
            &plan,
            42,
            &SimOptions { trials: 20_000, ..SimOptions::default() },
        )
        .expect("simulate");
        assert!(
            report.relative_error() <= 0.02,
            "analog chain must land within 2% of the trace prediction: predicted {}, got {} ({} trials)",
            report.predicted,
            report.empirical_mse,
            report.trials
        );
        assert!(
            (report.empirical_mse - report.predicted).abs() <= 1.5 * report.ci_halfwidth,
            "prediction should sit near the confidence interval: |{} - {}| vs half-width {}",
            report.empirical_mse,
            report.predicted,
            report.ci_halfwidth
        );
    }

    #[test]
    fn digital_simulation_matches_prediction() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::from_assignment(table.dims, &[(2, 1), (1, 0), (1, 1), (0, 0)]);
        let report = simulate_static_digital(
            &scenario,
            &table,
            &plan,
            7,
            &SimOptions { trials: 20_000, ..SimOptions::default() },
        )
        .expect("simulate");
        assert!(
            report.relative_error() <= 0.02,
            "digital chain must land within 2% of the trace prediction: predicted {}, got {}",
            report.predicted,
            report.empirical_mse
        );
    }

    #[test]
    fn static_prediction_agrees_with_objective() {
        // The simulator assembles the information matrix independently of
        // the objective; the two must price every plan identically.
        let scenario = test_scenario(
            vec![Point::new(150.0, 150.0), Point::new(250.0, 250.0)],
            vec![vec![2.0, 0.3], vec![0.3, 1.5]],
        );
        let table = LinkTable::build(&scenario).expect("table");
        for scheme in [Scheme::Analog, Scheme::Digital] {
            let objective = StaticObjective::new(&scenario, &table, scheme).expect("objective");
            for assignment in [
                vec![(0, 0); 4],
                vec![(1, 0), (2, 0), (0, 0), (1, 0)],
                vec![(2, 1), (2, 0), (1, 1), (2, 1)],
            ] {
                let plan = Selection::from_assignment(table.dims, &assignment);
                let report = match scheme {
                    Scheme::Analog => simulate_static_analog(
                        &scenario,
                        &table,
                        &plan,
                        1,
                        &SimOptions { trials: 1, ..SimOptions::default() },
                    ),
                    Scheme::Digital => simulate_static_digital(
                        &scenario,
                        &table,
                        &plan,
                        1,
                        &SimOptions { trials: 1, ..SimOptions::default() },
                    ),
                }
                .expect("simulate");
                let value = objective.value(&plan);
                assert!(
                    (report.predicted - value).abs() <= 1e-12 * (1.0 + value.abs()),
                    "{scheme:?}: simulator prediction {} must equal the objective {}",
                    report.predicted,
                    value
                );
            }
        }
    }

    #[test]
    fn vector_source_simulation_matches_prediction() {
        let scenario = test_scenario(
            vec![Point::new(150.0, 150.0), Point::new(250.0, 250.0)],
            vec![vec![2.0, 0.3], vec![0.3, 1.5]],
        );
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::from_assignment(table.dims, &[(2, 0), (1, 0), (2, 0), (1, 0)]);
        let report = simulate_static_analog(
            &scenario,
            &table,
            &plan,
            3,
            &SimOptions { trials: 20_000, ..SimOptions::default() },
        )
        .expect("simulate");
        assert!(
            report.relative_error() <= 0.02,
            "two-source trace must match within 2%: predicted {}, got {}",
            report.predicted,
            report.empirical_mse
        );
    }

    #[test]
    fn empty_plan_reproduces_prior_trace() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::from_assignment(table.dims, &[(0, 0); 4]);
        let report = simulate_static_analog(
            &scenario,
            &table,
            &plan,
            11,
            &SimOptions { trials: 30_000, ..SimOptions::default() },
        )
        .expect("simulate");
        assert!(
            (report.predicted - 2.0).abs() < 1e-12,
            "no sensors leave the prior trace as the prediction"
        );
        assert!(
            report.relative_error() < 0.03,
            "estimating by the prior mean must average to the prior trace, got {}",
            report.empirical_mse
        );
    }

    #[test]
    fn dynamic_simulation_tracks_steady_state() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = two_sensor_plan(&table);
        for scheme in [Scheme::Analog, Scheme::Digital] {
            let report = simulate_dynamic(
                &scenario,
                &table,
                &plan,
                scheme,
                5,
                &SimOptions { trials: 200, intervals: 2_000, ..SimOptions::default() },
            )
            .expect("simulate");
            assert!(
                report.relative_error() <= 0.03,
                "{scheme:?}: filtered error must match the steady-state prediction within 3%: predicted {}, got {}",
                report.predicted,
                report.empirical_mse
            );
            assert_eq!(report.samples, 200 * 1_600, "burn-in discards 20% of intervals");
        }
    }

    #[test]
    fn dynamic_empty_plan_settles_at_stationary_variance() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::from_assignment(table.dims, &[(0, 0); 4]);
        let report = simulate_dynamic(
            &scenario,
            &table,
            &plan,
            Scheme::Analog,
            9,
            &SimOptions { trials: 400, intervals: 1_000, ..SimOptions::default() },
        )
        .expect("simulate");
        let stationary = scenario.dynamic_prior.stationary_var();
        assert!(
            (report.predicted - stationary).abs() < 1e-12,
            "no information keeps the prediction at the stationary variance {stationary}"
        );
        assert!(
            report.relative_error() <= 0.05,
            "an uninformed filter's error must hover at the stationary variance, got {} vs {}",
            report.empirical_mse,
            report.predicted
        );
    }

    #[test]
    fn simulations_are_deterministic() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = two_sensor_plan(&table);
        let options = SimOptions { trials: 500, ..SimOptions::default() };
        let a = simulate_static_analog(&scenario, &table, &plan, 13, &options).expect("simulate");
        let b = simulate_static_analog(&scenario, &table, &plan, 13, &options).expect("simulate");
        assert_eq!(a.empirical_mse, b.empirical_mse, "same seed must reproduce the estimate");
        let c = simulate_static_analog(&scenario, &table, &plan, 14, &options).expect("simulate");
        assert_ne!(
            a.empirical_mse, c.empirical_mse,
            "a different seed must draw different noise"
        );
    }

    #[test]
    fn growing_trials_extends_the_sample_set() {
        // Stream-per-trial seeding means the first trials of a longer run
        // are exactly the trials of a shorter one.
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = two_sensor_plan(&table);
        let short = simulate_static_analog(
            &scenario,
            &table,
            &plan,
            21,
            &SimOptions { trials: 100, ..SimOptions::default() },
        )
        .expect("simulate");
        let long = simulate_static_analog(
            &scenario,
            &table,
            &plan,
            21,
            &SimOptions { trials: 400, ..SimOptions::default() },
        )
        .expect("simulate");
        assert!(
            long.ci_halfwidth < 0.7 * short.ci_halfwidth,
            "quadrupling trials must shrink the confidence interval by about half: {} vs {}",
            long.ci_halfwidth,
            short.ci_halfwidth
        );
    }

    #[test]
    fn fractional_plans_are_rejected() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::uniform(table.dims);
        let err = simulate_static_analog(&scenario, &table, &plan, 0, &SimOptions::default())
            .expect_err("fractional plans cannot be deployed");
        assert!(matches!(err, SimError::FractionalPlan), "got {err:?}");
    }

    #[test]
    fn dynamic_rejects_multiple_sources() {
        let scenario = test_scenario(
            vec![Point::new(150.0, 150.0), Point::new(250.0, 250.0)],
            vec![vec![2.0, 0.3], vec![0.3, 1.5]],
        );
        let table = LinkTable::build(&scenario).expect("table");
        let plan = Selection::from_assignment(table.dims, &[(0, 0); 4]);
        let err = simulate_dynamic(&scenario, &table, &plan, Scheme::Analog, 0, &SimOptions::default())
            .expect_err("tracking is single-source");
        assert!(matches!(err, SimError::MultiSource(2)), "got {err:?}");
    }

    #[test]
    fn degenerate_sample_counts_are_rejected() {
        let scenario = single_source();
        let table = LinkTable::build(&scenario).expect("table");
        let plan = two_sensor_plan(&table);
        let none = SimOptions { trials: 0, ..SimOptions::default() };
        assert!(matches!(
            simulate_static_analog(&scenario, &table, &plan, 0, &none),
            Err(SimError::NoSamples(_))
        ));
        let all_burned = SimOptions { burn_in: 1.0, ..SimOptions::default() };
        assert!(matches!(
            simulate_dynamic(&scenario, &table, &plan, Scheme::Analog, 0, &all_burned),
            Err(SimError::NoSamples(_))
        ));
    }

    #[test]
    fn pairwise_sum_is_exact_on_structured_input() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0, "integer sums must be exact");
        let (mean, ci) = mean_and_ci(&[1.0, 1.0, 1.0, 1.0], 1.96);
        assert_eq!(mean, 1.0, "constant samples average to themselves");
        assert_eq!(ci, 0.0, "constant samples have zero standard error");
    }
}
