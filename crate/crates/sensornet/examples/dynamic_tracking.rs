//! Plan a deployment that tracks a moving (first-order autoregressive)
//! source and inspect the information-to-error tradeoff behind it.
//!
//! The dynamic problems maximize the total information rate delivered to the
//! fusion center; the steady-state Kalman filter turns that rate into a
//! tracking error. This example solves both the analog and digital variants
//! and shows the closed form agreeing with the Riccati recursion. Run with:
//!
//! ```text
//! cargo run --example dynamic_tracking
//! ```

use sensornet::link::LinkTable;
use sensornet::objective::{info_bound_for_error, riccati_mmse, steady_state_mmse};
use sensornet::pipeline::solve_and_round;
use sensornet::relax::{ProblemId, SolveOptions};
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_dynamic.json"
    ))?;
    let scenario = load_scenario(&text)?;
    let table = LinkTable::build(&scenario)?;
    let prior = &scenario.dynamic_prior;

    let options = SolveOptions { round_seed: 7, ..SolveOptions::default() };
    for (label, problem) in [
        ("analog forwarding", ProblemId::DynamicLops),
        ("digital transmission", ProblemId::DynamicBlops),
    ] {
        let outcome = solve_and_round(&scenario, &table, problem, &options)?;
        let info = outcome.plan_info.expect("dynamic plans report their information rate");
        let (riccati, iterations) = riccati_mmse(info, prior.a, prior.drive_var, 1e-13, 100_000);
        println!("{label}:");
        println!("  information rate      : {info:.6}");
        println!("  steady-state error    : {:.6}", outcome.plan_mmse);
        println!("  Riccati check         : {riccati:.6} ({iterations} iterations)");
        println!(
            "  closed form residual  : {:.3e}",
            (steady_state_mmse(info, prior.a, prior.drive_var) - riccati).abs()
        );
    }

    // The mapping also inverts: how much information would a target need?
    let target = 0.005;
    let needed = info_bound_for_error(target, prior.a, prior.drive_var)?;
    println!("\ntracking error {target} needs an information rate of at least {needed:.3}");
    Ok(())
}
