//! Trace the error-versus-budget frontier: solve the same planning problem
//! across a grid of cost budgets and validate each rounded plan by
//! simulation.
//!
//! Prints the same CSV table the `sweep` subcommand emits. Run with:
//!
//! ```text
//! cargo run --example cost_sweep
//! ```

use sensornet::link::LinkTable;
use sensornet::pipeline::{render_rows, run_sweep, OutputFormat, RunConfig};
use sensornet::relax::{ProblemId, SolveOptions};
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_static.json"
    ))?;
    let scenario = load_scenario(&text)?;
    let table = LinkTable::build(&scenario)?;

    let config = RunConfig {
        problem: ProblemId::StaticBlops,
        lambdas: (1..=8).map(|i| 4.0 * i as f64).collect(),
        options: SolveOptions::default(),
        seed: 21,
        trials: 2000,
        jobs: 0, // use every core
    };
    let rows = run_sweep(&scenario, &table, &config)?;

    print!("{}", render_rows(&rows, OutputFormat::Csv));

    let first = rows.first().expect("the sweep has rows");
    let last = rows.last().expect("the sweep has rows");
    eprintln!(
        "\nbudget {} -> error {:.4}; budget {} -> error {:.4}; larger budgets never hurt",
        first.lambda, first.rounded, last.lambda, last.rounded
    );
    Ok(())
}
