//! Walk one sensor's link budget from harvested energy to effective
//! measurement noise at the fusion center.
//!
//! For every candidate (location, type, bandwidth) cell the link table
//! precomputes harvested power, per-channel transmit power, SNR, and the
//! resulting effective noise for both analog forwarding and quantized
//! digital transmission. The weakest deployable link makes the tradeoffs
//! visible: its SNR is near unity, so the quantizer resolution — and with
//! it the digital effective noise — moves with the bandwidth choice. Run
//! with:
//!
//! ```text
//! cargo run --example link_budget
//! ```

use sensornet::link::{quantization_var_limit, LinkTable};
use sensornet::scenario::{load_scenario, BOLTZMANN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference_static.json"
    ))?;
    let scenario = load_scenario(&text)?;
    let table = LinkTable::build(&scenario)?;
    let dims = table.dims;

    // The deployable cell with the lowest SNR: the cheapest real sensor at
    // the location farthest from the fusion center.
    let (l, k) = (0..dims.locations)
        .flat_map(|l| (1..dims.types).map(move |k| (l, k)))
        .filter(|&(l, k)| table.node_powers[l * dims.types + k] > 0.0)
        .min_by(|&(l1, k1), &(l2, k2)| {
            let snr1 = table.snrs[dims.idx(l1, k1, 0)];
            let snr2 = table.snrs[dims.idx(l2, k2, 0)];
            snr1.partial_cmp(&snr2).expect("finite SNRs")
        })
        .expect("the scenario has deployable cells");

    println!(
        "weakest deployable link: location ({:.0}, {:.0}), type {k}",
        scenario.locations[l].x, scenario.locations[l].y
    );
    println!("  harvested power    : {:.3e} W", table.node_powers[l * dims.types + k]);
    println!("  channel gain to FC : {:.3e}", table.channel_gains[l]);
    println!("  receiver noise     : {:.3e} W per channel", table.receiver_noise);
    println!("  source signal power: {:.2}", table.signal_vars[l]);

    println!("\n  digital transmission per bandwidth choice:");
    println!(
        "  {:>9} {:>8} {:>16} {:>13} {:>13}",
        "bandwidth", "snr", "quantizer levels", "quant. noise", "total noise"
    );
    for b in 0..dims.bands {
        let idx = dims.idx(l, k, b);
        println!(
            "  {:>6.0} kHz {:>8.3} {:>16} {:>13.3e} {:>13.8}",
            scenario.bandwidths[b].hz / 1e3,
            table.snrs[idx],
            table.levels[idx],
            table.quant_vars[idx],
            table.digital_vars[idx]
        );
    }
    println!(
        "  analog forwarding on any bandwidth: total noise {:.8}",
        table.analog_vars[dims.idx(l, k, 0)]
    );
    println!(
        "  (wider slices lower the per-channel SNR but win overall: more \
         channels yield more bits)"
    );

    // Quantization noise cannot be squeezed below the capacity limit, no
    // matter how much bandwidth a single sensor is handed.
    let n = scenario.grid.channel_count();
    let kdw = BOLTZMANN * scenario.noise.temperature * scenario.grid.bandwidth;
    let (limit, saturated) = quantization_var_limit(
        table.signal_vars[l],
        table.node_powers[l * dims.types + k],
        table.channel_gains[l],
        n,
        kdw,
    );
    println!("\n  quantization-noise floor at unlimited bandwidth: {limit:.3e}");
    if saturated {
        println!("  (the 64-bit level counter saturates: the floor is numerically zero)");
    }
    Ok(())
}
