//! Per-cell link budgets: everything the optimizer needs to know about
//! deploying sensor type `k` with bandwidth `b` at location `l`.
//!
//! [`LinkTable::build`] evaluates the whole physical chain once per cell:
//! harvested power -> transmit power -> per-channel power -> channel SNR ->
//! analog forwarding noise (amplify-and-forward over one resource channel)
//! and digital quantization noise (quantize-and-transmit over the chosen
//! bandwidth). Solvers, rounding, and the Monte Carlo simulators all read from
//! this table; none of them re-derives physics.
//!
//! Quantizer resolution is handled in log2 space throughout: the usable number
//! of levels grows like `(1 + snr)^channels` and overflows `f64` long before
//! the scenarios here stop being realistic.

use crate::scenario::{
    channel_gain, harvested_power, measurement_gain, node_power, Scenario, ScenarioError,
    BOLTZMANN,
};

/// Levels counts at or above 2^64 are reported as saturated; their
/// quantization noise is evaluated in log space instead.
const SATURATION_BITS: f64 = 64.0;

/// Absolute snap width (in bits) for pulling an almost-integer level count
/// onto the integer before flooring, so that analytically-exact powers like
/// `(1 + 1)^3 = 8` never floor down to 7 through rounding.
const BITS_SNAP: f64 = 1e-9;

/// Table dimensions: `locations x types x bands` (types includes the k = 0
/// "no sensor" entry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct LinkDims {
    pub locations: usize,
    pub types: usize,
    pub bands: usize,
}

impl LinkDims {
    /// Number of cells `L * (K+1) * B`.
    pub fn cells(&self) -> usize {
        self.locations * self.types * self.bands
    }

    /// Flat index of cell `(l, k, b)`, lexicographic in `(l, k, b)`.
    pub fn idx(&self, l: usize, k: usize, b: usize) -> usize {
        debug_assert!(l < self.locations && k < self.types && b < self.bands);
        (l * self.types + k) * self.bands + b
    }
}

/// Precomputed link budgets for every `(location, type, bandwidth)` cell.
///
/// Flat vectors are indexed by [`LinkDims::idx`]; per-location vectors by `l`;
/// `measurement_gains` is row-major `L x m`. Cells with `k = 0` carry explicit
/// "no transmission" sentinels: zero power, zero SNR, one quantizer level, and
/// infinite end-to-end noise on both schemes.
#[derive(Debug, Clone)]
pub struct LinkTable {
    pub dims: LinkDims,
    /// Number of sources m.
    pub sources: usize,
    /// Uplink power gain g_l to the fusion center, per location.
    pub channel_gains: Vec<f64>,
    /// Measurement gain h_{l,i} of each source at each location, `L x m`.
    pub measurement_gains: Vec<f64>,
    /// Variance of the analog measurement signal at each location
    /// (source contribution plus measurement noise).
    pub signal_vars: Vec<f64>,
    /// Transmit power P_{l,k} of type k at location l, `L x (K+1)`, watts.
    pub node_powers: Vec<f64>,
    /// Per-channel transmit power after concentrating the interval's energy
    /// into the occupied channels, per cell, watts.
    pub channel_powers: Vec<f64>,
    /// Received per-channel SNR at the fusion center, per cell.
    pub snrs: Vec<f64>,
    /// End-to-end effective noise variance of analog forwarding, per cell.
    pub analog_vars: Vec<f64>,
    /// Usable quantizer levels, per cell; saturates at `u64::MAX`.
    pub levels: Vec<u64>,
    /// Quantization noise variance, per cell.
    pub quant_vars: Vec<f64>,
    /// End-to-end effective noise variance of digital transmission, per cell.
    pub digital_vars: Vec<f64>,
    /// Per-channel thermal noise floor at the receiver, watts.
    pub receiver_noise: f64,
    /// Measurement noise variance common to all sensors.
    pub measurement_var: f64,
}

impl LinkTable {
    /// Evaluate the full link budget for a validated scenario.
    pub fn build(scenario: &Scenario) -> Result<LinkTable, ScenarioError> {
        let dims = LinkDims {
            locations: scenario.n_locations(),
            types: scenario.n_types(),
            bands: scenario.n_bands(),
        };
        let m = scenario.n_sources();
        let alpha = scenario.field.path_loss_exponent;
        let sigma_v2 = scenario.noise.measurement_var;
        let time_channels = scenario.grid.time_channels as f64;
        let receiver_noise =
            BOLTZMANN * scenario.noise.temperature * scenario.grid.channel_width();

        let mut channel_gains = Vec::with_capacity(dims.locations);
        let mut measurement_gains = Vec::with_capacity(dims.locations * m);
        let mut signal_vars = Vec::with_capacity(dims.locations);
        let mut node_powers = Vec::with_capacity(dims.locations * dims.types);
        let cells = dims.cells();
        let mut channel_powers = vec![0.0; cells];
        let mut snrs = vec![0.0; cells];
        let mut analog_vars = vec![f64::INFINITY; cells];
        let mut levels = vec![1u64; cells];
        let mut quant_vars = vec![0.0; cells];
        let mut digital_vars = vec![f64::INFINITY; cells];

        for (l, &loc) in scenario.locations.iter().enumerate() {
            let g = channel_gain(loc, scenario.fc, alpha)?;
            channel_gains.push(g);

            let row = l * m;
            for &src in &scenario.sources {
                measurement_gains.push(measurement_gain(loc, src, &scenario.field.diffusion));
            }
            let h = &measurement_gains[row..row + m];
            let mut quad = 0.0;
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += scenario.static_prior[i][j] * h[j];
                }
                quad += h[i] * acc;
            }
            let sigma_x2 = quad + sigma_v2;
            signal_vars.push(sigma_x2);

            let rho = harvested_power(
                loc,
                &scenario.base_stations,
                scenario.field.solar_floor.watts(),
                alpha,
            )?;

            for (k, ty) in scenario.sensor_types.iter().enumerate() {
                let p = node_power(rho, ty);
                node_powers.push(p);
                if k == 0 {
                    // "no sensor" sentinels: nothing is transmitted, indexed
                    // cells keep their defaults except the quantizer, whose
                    // single level reproduces the signal variance.
                    for b in 0..dims.bands {
                        quant_vars[dims.idx(l, 0, b)] = sigma_x2;
                    }
                    continue;
                }

                // Analog forwarding occupies a single resource channel, so the
                // whole interval's energy is concentrated into one slot.
                let p_analog = p * time_channels;
                let analog_var = if g * p_analog > 0.0 {
                    sigma_v2 + sigma_x2 * receiver_noise / (g * p_analog)
                } else {
                    f64::INFINITY
                };

                for (b, band) in scenario.bandwidths.iter().enumerate() {
                    let i = dims.idx(l, k, b);
                    let n_b = band.channels;
                    let p_hat = p * time_channels / n_b as f64;
                    let snr = p_hat * g / receiver_noise;
                    let bits = quantization_bits(snr, n_b as u64);
                    let (q, _saturated) = quantization_levels(bits);
                    channel_powers[i] = p_hat;
                    snrs[i] = snr;
                    analog_vars[i] = analog_var;
                    levels[i] = q;
                    quant_vars[i] = quantization_noise(sigma_x2, bits);
                    digital_vars[i] = sigma_v2 + quant_vars[i];
                }
            }
        }

        Ok(LinkTable {
            dims,
            sources: m,
            channel_gains,
            measurement_gains,
            signal_vars,
            node_powers,
            channel_powers,
            snrs,
            analog_vars,
            levels,
            quant_vars,
            digital_vars,
            receiver_noise,
            measurement_var: sigma_v2,
        })
    }

    /// Flat index of cell `(l, k, b)`.
    pub fn idx(&self, l: usize, k: usize, b: usize) -> usize {
        self.dims.idx(l, k, b)
    }

    /// Render the table as CSV, one row per `(l, k, b)` cell in lexicographic
    /// order. Infinities print as `inf`; floats use the shortest
    /// round-trippable decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,k,b,P,P_hat,snr,sigma_x2,sigma_e2,Q,sigma_q2,sigma_etilde2\n");
        for l in 0..self.dims.locations {
            for k in 0..self.dims.types {
                for b in 0..self.dims.bands {
                    let i = self.dims.idx(l, k, b);
                    out.push_str(&format!(
                        "{l},{k},{b},{},{},{},{},{},{},{},{}\n",
                        self.node_powers[l * self.dims.types + k],
                        self.channel_powers[i],
                        self.snrs[i],
                        self.signal_vars[l],
                        self.analog_vars[i],
                        self.levels[i],
                        self.quant_vars[i],
                        self.digital_vars[i],
                    ));
                }
            }
        }
        out
    }
}

/// Base-2 log of the usable quantizer level count: `channels * log2(1 + snr)`.
///
/// Values within [`BITS_SNAP`] of an integer snap onto it, so analytically
/// exact level counts survive floating-point evaluation.
pub fn quantization_bits(snr: f64, channels: u64) -> f64 {
    let bits = channels as f64 * snr.ln_1p() / std::f64::consts::LN_2;
    if (bits - bits.round()).abs() <= BITS_SNAP {
        bits.round()
    } else {
        bits
    }
}

/// Usable quantizer levels `floor((1 + snr)^channels)` given the bit count
/// from [`quantization_bits`]. Returns the level count (clamped to
/// `u64::MAX`) and whether it saturated.
pub fn quantization_levels(bits: f64) -> (u64, bool) {
    if bits >= SATURATION_BITS {
        (u64::MAX, true)
    } else {
        (bits.exp2().floor() as u64, false)
    }
}

/// Quantization noise variance for a signal of variance `sigma_x2` pushed
/// through the quantizer described by `bits`: `sigma_x2 / Q^2`, evaluated in
/// log space once the level count saturates (where dropping the floor is a
/// relative error below 2^-63).
pub fn quantization_noise(sigma_x2: f64, bits: f64) -> f64 {
    let (q, saturated) = quantization_levels(bits);
    if saturated {
        sigma_x2 * (-2.0 * bits).exp2()
    } else {
        let qf = q as f64;
        sigma_x2 / (qf * qf)
    }
}

/// Large-bandwidth limit of the quantization noise when one sensor spreads
/// over the entire grid: the level count tends to `floor(exp(p*g*n/kdw))`
/// where `n` is the total channel count and `kdw` the thermal noise power over
/// the full system bandwidth. Returns the limiting variance and whether the
/// level count saturated.
pub fn quantization_var_limit(
    sigma_x2: f64,
    p: f64,
    g: f64,
    n_channels: u64,
    kdw: f64,
) -> (f64, bool) {
    assert!(kdw > 0.0, "thermal noise power must be positive");
    let exponent = p * g * n_channels as f64 / kdw;
    let bits = {
        let raw = exponent / std::f64::consts::LN_2;
        if (raw - raw.round()).abs() <= BITS_SNAP {
            raw.round()
        } else {
            raw
        }
    };
    let (_, saturated) = quantization_levels(bits);
    (quantization_noise(sigma_x2, bits), saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_scenario;
    use proptest::prelude::*;

    fn reference_table() -> (Scenario, LinkTable) {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/reference_static.json");
        let text = std::fs::read_to_string(path).expect("reference scenario ships with the repo");
        let scenario = load_scenario(&text).expect("reference scenario is valid");
        let table = LinkTable::build(&scenario).expect("table builds");
        (scenario, table)
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn dims_and_no_sensor_sentinels() {
        let (_, t) = reference_table();
        assert_eq!(
            t.dims,
            LinkDims { locations: 36, types: 4, bands: 3 }
        );
        assert_eq!(t.channel_powers.len(), 36 * 4 * 3);
        for l in 0..36 {
            assert_eq!(t.node_powers[l * 4], 0.0, "type 0 never transmits");
            for b in 0..3 {
                let i = t.idx(l, 0, b);
                assert_eq!(t.channel_powers[i], 0.0);
                assert_eq!(t.snrs[i], 0.0);
                assert_eq!(t.levels[i], 1);
                assert_eq!(t.quant_vars[i], t.signal_vars[l]);
                assert!(t.analog_vars[i].is_infinite());
                assert!(t.digital_vars[i].is_infinite());
            }
        }
    }

    #[test]
    fn center_cell_matches_frozen_budget() {
        // location 14 = (165, 165): the grid point nearest the fusion center.
        let (_, t) = reference_table();
        assert!(rel_close(t.channel_gains[14], 4.081632653061224e-4, 1e-12));
        assert!(rel_close(t.signal_vars[14], 48.93159329165442, 1e-12));
        assert!(rel_close(t.node_powers[14 * 4 + 3], 5.996629850992666e-4, 1e-12));
        assert!(rel_close(t.node_powers[14 * 4 + 1], 1.9988766169975555e-4, 1e-12));
        let i = t.idx(14, 3, 0);
        assert!(rel_close(t.channel_powers[i], 2.998314925496333e-4, 1e-12));
        assert!(rel_close(t.snrs[i], 122.38020104066663, 1e-12));
        assert!(rel_close(t.analog_vars[i], 1.019991629722603, 1e-12));
        // ~139 bits of resolution: the level count saturates and the
        // quantization noise vanishes below one ulp of the measurement noise.
        assert_eq!(t.levels[i], u64::MAX);
        assert!(t.quant_vars[i] < 1e-80);
        assert_eq!(t.digital_vars[i], t.measurement_var);
        // thermal floor engineered to exactly one nanowatt per channel
        assert_eq!(t.receiver_noise, 1e-9);
    }

    #[test]
    fn corner_cell_keeps_finite_resolution() {
        // location 0 = (25, 25): far from the fusion center, weakest link.
        let (_, t) = reference_table();
        assert!(rel_close(t.channel_gains[0], 1.6326530612244897e-5, 1e-12));
        assert!(rel_close(t.signal_vars[0], 11.004122913184895, 1e-12));
        assert!(rel_close(t.node_powers[0 * 4 + 1], 1.605567811223006e-4, 1e-12));
        let i = t.idx(0, 1, 0);
        assert!(rel_close(t.snrs[i], 1.310667600998372, 1e-12));
        assert!(rel_close(t.analog_vars[i], 1.419790757961925, 1e-12));
        // ~24 bits: a finite level count the direct power evaluation confirms
        let q = t.levels[i];
        assert!(q > 1 && q < u64::MAX);
        let direct = (1.0 + t.snrs[i]).powf(20.0).floor() as u64;
        assert!(
            q.abs_diff(direct) <= 1,
            "log-space levels {q} disagree with direct evaluation {direct}"
        );
        let qf = q as f64;
        assert_eq!(t.quant_vars[i], t.signal_vars[0] / (qf * qf));
        assert!(t.digital_vars[i] > t.measurement_var);
        assert!(t.digital_vars[i] < t.measurement_var + 1e-12);
    }

    #[test]
    fn energy_concentration_scales_with_occupied_channels() {
        let (s, t) = reference_table();
        for l in 0..t.dims.locations {
            for k in 1..t.dims.types {
                let p = t.node_powers[l * t.dims.types + k];
                for b in 0..t.dims.bands {
                    let i = t.idx(l, k, b);
                    let n_b = s.bandwidths[b].channels as f64;
                    let expect = p * s.grid.time_channels as f64 / n_b;
                    assert!(rel_close(t.channel_powers[i], expect, 1e-15));
                }
                // doubling / tripling the occupied channels halves / thirds
                // the per-channel power, and the SNR with it
                let (i0, i1, i2) = (t.idx(l, k, 0), t.idx(l, k, 1), t.idx(l, k, 2));
                assert!(rel_close(t.channel_powers[i0], 2.0 * t.channel_powers[i1], 1e-15));
                assert!(rel_close(t.channel_powers[i0], 3.0 * t.channel_powers[i2], 1e-15));
                if t.node_powers[l * t.dims.types + k] > 0.0 {
                    assert!(t.snrs[i0] > t.snrs[i1] && t.snrs[i1] > t.snrs[i2]);
                }
            }
        }
    }

    #[test]
    fn analog_noise_ignores_bandwidth_choice() {
        let (_, t) = reference_table();
        for l in 0..t.dims.locations {
            for k in 1..t.dims.types {
                let base = t.analog_vars[t.idx(l, k, 0)];
                for b in 1..t.dims.bands {
                    assert_eq!(t.analog_vars[t.idx(l, k, b)], base);
                }
                assert!(base > t.measurement_var, "forwarding noise strictly inflates");
            }
        }
    }

    #[test]
    fn digital_never_noisier_than_analog_here() {
        // In this scenario family every active cell resolves enough quantizer
        // levels that quantization noise stays below the analog forwarding
        // penalty. The planner comparisons in the acceptance suite rely on it.
        let (_, t) = reference_table();
        for l in 0..t.dims.locations {
            for k in 1..t.dims.types {
                for b in 0..t.dims.bands {
                    let i = t.idx(l, k, b);
                    assert!(
                        t.digital_vars[i] <= t.analog_vars[i],
                        "cell ({l},{k},{b}): digital {} vs analog {}",
                        t.digital_vars[i],
                        t.analog_vars[i]
                    );
                }
            }
        }
    }

    #[test]
    fn noise_improves_with_stronger_types() {
        let (_, t) = reference_table();
        for l in 0..t.dims.locations {
            for b in 0..t.dims.bands {
                for k in 1..t.dims.types - 1 {
                    let (i, j) = (t.idx(l, k, b), t.idx(l, k + 1, b));
                    assert!(t.digital_vars[j] <= t.digital_vars[i]);
                    assert!(t.analog_vars[j] <= t.analog_vars[i]);
                }
            }
        }
    }

    #[test]
    fn quantizer_exact_small_cases() {
        assert_eq!(quantization_levels(quantization_bits(1.0, 3)), (8, false));
        assert_eq!(quantization_levels(quantization_bits(0.5, 2)), (2, false));
        assert_eq!(quantization_levels(quantization_bits(3.0, 5)), (1024, false));
        assert_eq!(quantization_levels(quantization_bits(0.0, 60)), (1, false));
        // a hair below an exact power still snaps onto it instead of
        // flooring through it
        assert_eq!(quantization_levels(quantization_bits(1.0 - 1e-12, 3)), (8, false));
        // saturation far past 64 bits
        let (q, sat) = quantization_levels(quantization_bits(122.38020104066663, 20));
        assert_eq!((q, sat), (u64::MAX, true));
    }

    #[test]
    fn quantization_noise_tracks_levels() {
        let bits = quantization_bits(0.5, 2); // 2 levels
        assert_eq!(quantization_noise(9.0, bits), 2.25);
        // saturated path evaluates in log space and underflows to exactly 0
        // once 2^(-2 bits) drops below the subnormal range
        let bits = quantization_bits(1.0e9, 20);
        assert_eq!(quantization_noise(50.0, bits), 0.0);
    }

    #[test]
    fn bandwidth_limit_matches_closed_form() {
        // p * g * n / kdw == 10 by construction, so the limiting level count
        // is floor(e^10) = 22026.
        let kdw = 4.00403e-15;
        let p = 4.0040299999999995e-17;
        let (var, saturated) = quantization_var_limit(1.0, p, 1.0, 1000, kdw);
        assert!(!saturated);
        assert!(rel_close(var, 2.0612407998475077e-9, 1e-12));
        // zero transmit power degenerates to a single level
        let (var, saturated) = quantization_var_limit(7.0, 0.0, 1.0, 1000, kdw);
        assert_eq!((var, saturated), (7.0, false));
    }

    #[test]
    fn csv_round_trips_per_cell_values() {
        let (_, t) = reference_table();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "l,k,b,P,P_hat,snr,sigma_x2,sigma_e2,Q,sigma_q2,sigma_etilde2"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 36 * 4 * 3);
        // spot-check the frozen center cell: row for (14, 3, 0)
        let row = rows[(14 * 4 + 3) * 3];
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(&f[0..3], &["14", "3", "0"]);
        assert_eq!(f[3].parse::<f64>().unwrap(), t.node_powers[14 * 4 + 3]);
        assert_eq!(f[4].parse::<f64>().unwrap(), t.channel_powers[t.idx(14, 3, 0)]);
        assert_eq!(f[5].parse::<f64>().unwrap(), t.snrs[t.idx(14, 3, 0)]);
        assert_eq!(f[6].parse::<f64>().unwrap(), t.signal_vars[14]);
        assert_eq!(f[7].parse::<f64>().unwrap(), t.analog_vars[t.idx(14, 3, 0)]);
        assert_eq!(f[8].parse::<u64>().unwrap(), u64::MAX);
        assert_eq!(f[9].parse::<f64>().unwrap(), t.quant_vars[t.idx(14, 3, 0)]);
        assert_eq!(f[10].parse::<f64>().unwrap(), t.digital_vars[t.idx(14, 3, 0)]);
        // sentinel row renders infinities as "inf"
        let row0 = rows[0];
        assert!(row0.starts_with("0,0,0,0,0,0,"));
        assert!(row0.ends_with(",inf"), "digital noise sentinel renders as inf: {row0}");
    }

    proptest! {
        #[test]
        fn levels_monotone_in_snr_and_channels(
            snr1 in 0.0..1e3f64, snr2 in 0.0..1e3f64, nb in 1u64..60,
        ) {
            let (lo, hi) = if snr1 <= snr2 { (snr1, snr2) } else { (snr2, snr1) };
            let (q_lo, _) = quantization_levels(quantization_bits(lo, nb));
            let (q_hi, _) = quantization_levels(quantization_bits(hi, nb));
            prop_assert!(q_lo <= q_hi);
            prop_assert!(q_lo >= 1);
            let (q_more, _) = quantization_levels(quantization_bits(hi, nb + 1));
            prop_assert!(q_hi <= q_more, "more channels never lose resolution");
        }

        #[test]
        fn quantization_noise_bounded_by_signal(
            sigma_x2 in 1e-6..1e3f64, snr in 0.0..1e6f64, nb in 1u64..60,
        ) {
            let bits = quantization_bits(snr, nb);
            let var = quantization_noise(sigma_x2, bits);
            prop_assert!(var >= 0.0);
            prop_assert!(var <= sigma_x2, "one level at worst reproduces the signal variance");
        }
    }
}
