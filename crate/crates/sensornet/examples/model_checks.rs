//! Run the built-in self-checks that pin the physical model to its
//! mathematical identities.
//!
//! Four invariants must hold for any valid scenario: per-channel SNR is
//! independent of how the grid factors into time and frequency slots;
//! spreading an analog transmission's energy across duplicate channels
//! changes nothing; the closed-form tracking error is the Kalman/Riccati
//! fixed point; and quantization noise at an enormous bandwidth slice
//! reaches its closed-form limit. Run with:
//!
//! ```text
//! cargo run --example model_checks
//! ```

use sensornet::pipeline::verify_scenario;
use sensornet::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["reference_static", "reference_dynamic"] {
        let path = format!(
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/{}.json"),
            name
        );
        let scenario = load_scenario(&std::fs::read_to_string(&path)?)?;
        let report = verify_scenario(&scenario)?;

        println!("{name}:");
        for check in &report.checks {
            println!(
                "  [{}] {:<24} deviation {:9.3e} (tolerance {:.0e})",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.max_deviation,
                check.tolerance
            );
        }
        assert!(report.all_passed(), "shipped scenarios must pass every self-check");
    }
    Ok(())
}
