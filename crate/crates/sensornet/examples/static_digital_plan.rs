//! Plan a digital (quantize-and-transmit) deployment for estimating several
//! static sources at once.
//!
//! Solves the relaxed joint placement/type/bandwidth problem on the
//! reference scenario, rounds it to a deployable plan, and prints where the
//! budget went. Run with:
//!
//! ```text
//! cargo run --example static_digital_plan
//! ```

use sensornet::link::LinkTable;
use sensornet::pipeline::solve_and_round;
use sensornet::relax::{ProblemId, SolveOptions};
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_static.json"
    ))?;
    let scenario = load_scenario(&text)?;
    let table = LinkTable::build(&scenario)?;

    let options = SolveOptions { round_seed: 7, ..SolveOptions::default() };
    let outcome = solve_and_round(&scenario, &table, ProblemId::StaticBlops, &options)?;

    println!("relaxed lower bound : {:.6}", outcome.report.relaxed_value);
    println!("rounded plan error  : {:.6}", outcome.plan_mmse);
    println!(
        "budget use          : cost {:.1} of {:.1}, bandwidth {:.0} Hz of {:.0} Hz",
        outcome.plan_cost,
        scenario.budgets.cost,
        outcome.plan_spectrum,
        scenario.budgets.bandwidth
    );
    println!("feasible            : {}", outcome.feasible);

    println!("\ndeployed sensors (location -> type, bandwidth):");
    for (l, &(k, b)) in outcome.assignment.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let position = scenario.locations[l];
        println!(
            "  ({:5.0}, {:5.0})  type {k} (cost {:.0}), {:5.0} kHz",
            position.x,
            position.y,
            scenario.sensor_types[k].cost,
            scenario.bandwidths[b].hz / 1e3
        );
    }
    Ok(())
}
