//! Find the cheapest deployment that achieves a required estimation
//! accuracy, instead of the best accuracy under a fixed budget.
//!
//! The min-cost solver bisects on the cost budget, using the certified
//! relaxed bound to prove budgets too small and rounded plans to certify
//! budgets large enough. Run with:
//!
//! ```text
//! cargo run --example min_cost
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

    println!("cheapest deployments reaching a static estimation target:");
    println!("{:>10} {:>12} {:>12} {:>9}", "target", "cost found", "error", "sensors");
    for target in [0.30, 0.15, 0.10, 0.08] {
        let options = SolveOptions {
            error_target: Some(target),
            round_seed: 7,
            ..SolveOptions::default()
        };
        let outcome = solve_and_round(&scenario, &table, ProblemId::MinCostStatic, &options)?;
        let deployed = outcome.assignment.iter().filter(|(k, _)| *k > 0).count();
        println!(
            "{target:>10.2} {:>12.2} {:>12.4} {deployed:>9}",
            outcome.report.min_cost.expect("min-cost solves report a price"),
            outcome.plan_mmse
        );
    }

    // Push the target below what even the full catalog can deliver and the
    // solver reports infeasibility rather than a bogus plan.
    let impossible = SolveOptions { error_target: Some(1e-3), ..SolveOptions::default() };
    match solve_and_round(&scenario, &table, ProblemId::MinCostStatic, &impossible) {
        Err(err) => println!("\ntarget 0.001: {err}"),
        Ok(_) => unreachable!("a millistrength target is beyond the whole catalog"),
    }
    Ok(())
}
