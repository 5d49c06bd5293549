//! Measure what design freedom is worth: compare the flexible planner
//! against versions locked to a single sensor type or a single bandwidth.
//!
//! Restricting the catalog can only remove options, so the flexible curve
//! lies at or below every restricted one; the gaps show how much of the
//! performance comes from mixing types and bandwidths. Run with:
//!
//! ```text
//! cargo run --example restriction_study
//! ```

use sensornet::link::LinkTable;
use sensornet::pipeline::{restriction_mask, solve_and_round};
use sensornet::relax::{ProblemId, SolveOptions};
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_static.json"
    ))?;
    let scenario = load_scenario(&text)?;
    let table = LinkTable::build(&scenario)?;
    let base = SolveOptions { round_seed: 7, ..SolveOptions::default() };

    let flexible = solve_and_round(&scenario, &table, ProblemId::StaticBlops, &base)?;
    println!("{:<28} {:>10} {:>10}", "catalog", "relaxed", "rounded");
    println!("{:<28} {:>10.5} {:>10.5}", "flexible", flexible.report.relaxed_value, flexible.plan_mmse);

    let mut cases: Vec<(String, Option<usize>, Option<usize>)> = Vec::new();
    for k in 1..table.dims.types {
        cases.push((format!("type {k} only (cost {:.0})", scenario.sensor_types[k].cost), Some(k), None));
    }
    for b in 0..table.dims.bands {
        cases.push((format!("{:.0} kHz only", scenario.bandwidths[b].hz / 1e3), None, Some(b)));
    }

    for (label, keep_type, keep_band) in cases {
        let mask = restriction_mask(table.dims, keep_type, keep_band)?;
        let options = SolveOptions { cell_mask: Some(mask), ..base.clone() };
        let outcome = solve_and_round(&scenario, &table, ProblemId::StaticBlops, &options)?;
        let penalty = 100.0 * (outcome.plan_mmse / flexible.plan_mmse - 1.0);
        println!(
            "{label:<28} {:>10.5} {:>10.5}  (+{penalty:.1}%)",
            outcome.report.relaxed_value, outcome.plan_mmse
        );
    }
    Ok(())
}
