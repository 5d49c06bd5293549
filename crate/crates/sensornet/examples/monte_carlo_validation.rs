//! Check a planned deployment against a full signal-chain simulation.
//!
//! The planner promises an analytic estimation error; the simulator draws
//! sources, measurement noise, channel noise, and quantization effects, runs
//! the fusion-center estimator, and measures the error empirically. Run
//! with:
//!
//! ```text
//! cargo run --example monte_carlo_validation
//! ```

use sensornet::link::LinkTable;
use sensornet::montecarlo::{
    simulate_dynamic, simulate_static_analog, simulate_static_digital, SimOptions,
};
use sensornet::objective::Scheme;
use sensornet::pipeline::solve_and_round;
use sensornet::relax::{ProblemId, SolveOptions};
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let static_text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_static.json"
    ))?;
    let static_scenario = load_scenario(&static_text)?;
    let static_table = LinkTable::build(&static_scenario)?;
    let options = SolveOptions { round_seed: 7, ..SolveOptions::default() };

    println!("{:<22} {:>11} {:>11} {:>9} {:>11}", "chain", "predicted", "empirical", "rel", "95% CI");

    let analog =
        solve_and_round(&static_scenario, &static_table, ProblemId::StaticLops, &options)?;
    let sim = simulate_static_analog(
        &static_scenario,
        &static_table,
        &analog.plan,
        11,
        &SimOptions { trials: 20_000, ..SimOptions::default() },
    )?;
    report("static analog", sim.predicted, sim.empirical_mse, sim.ci_halfwidth);

    let digital =
        solve_and_round(&static_scenario, &static_table, ProblemId::StaticBlops, &options)?;
    let sim = simulate_static_digital(
        &static_scenario,
        &static_table,
        &digital.plan,
        12,
        &SimOptions { trials: 20_000, ..SimOptions::default() },
    )?;
    report("static digital", sim.predicted, sim.empirical_mse, sim.ci_halfwidth);

    let tracking_text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_dynamic.json"
    ))?;
    let tracking_scenario = load_scenario(&tracking_text)?;
    let tracking_table = LinkTable::build(&tracking_scenario)?;
    let plan =
        solve_and_round(&tracking_scenario, &tracking_table, ProblemId::DynamicBlops, &options)?;
    let sim = simulate_dynamic(
        &tracking_scenario,
        &tracking_table,
        &plan.plan,
        Scheme::Digital,
        13,
        &SimOptions { trials: 50, intervals: 4000, ..SimOptions::default() },
    )?;
    report("dynamic digital", sim.predicted, sim.empirical_mse, sim.ci_halfwidth);
    Ok(())
}

fn report(chain: &str, predicted: f64, empirical: f64, ci: f64) {
    let relative = (empirical - predicted).abs() / predicted;
    println!("{chain:<22} {predicted:>11.6} {empirical:>11.6} {relative:>8.2}% {ci:>11.6}",
        relative = 100.0 * relative);
}
