//! World model: field geometry, candidate sensing locations, sources, base
//! stations, the sensor-type catalog, the bandwidth catalog, the time/frequency
//! resource grid, budgets, and source priors.
//!
//! Scenarios load from a single JSON document (see [`load_scenario`] and the
//! schema walkthrough in the README). All quantities are normalized to SI units
//! (watts, hertz, seconds, meters) at parse time; power-valued fields accept
//! `{"w": x}`, `{"dbm": x}`, or `{"db": x}` (decibel-watts) objects.
//!
//! The physics helpers at the bottom ([`channel_gain`], [`measurement_gain`],
//! [`harvested_power`], [`node_power`]) are the only place geometry is turned
//! into link-budget quantities; everything downstream consumes their outputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boltzmann's constant in joules per kelvin.
pub const BOLTZMANN: f64 = 1.3807e-23;

/// Receiver temperature assumed when the config omits `noise.temperature`.
pub const DEFAULT_TEMPERATURE: f64 = 290.0;

/// Relative tolerance for the bandwidth-catalog consistency check
/// (`hz == grid.bandwidth * channels / grid.channel_count()`).
const BAND_CONSISTENCY_TOL: f64 = 1e-9;

/// Errors from scenario parsing, validation, and geometry.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// The document is not valid JSON or does not match the schema. The inner
    /// error carries line/column context.
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    /// A well-formed document violates a model invariant.
    #[error("invalid scenario: {field}: {message}")]
    Invariant { field: String, message: String },
    /// Two points that must be distinct coincide (singular gain / power).
    #[error("{context}: coincident points at ({x}, {y})")]
    CoincidentPoints { context: String, x: f64, y: f64 },
}

fn invariant(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invariant { field: field.into(), message: message.into() }
}

/// A 2-D point in meters. Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (f64, f64) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

/// A power quantity stored in watts.
///
/// Deserializes from `{"w": x}` (watts), `{"dbm": x}` (decibel-milliwatts), or
/// `{"db": x}` (decibel-watts); always serializes as `{"w": x}` so that a
/// serialize/parse round trip is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power(pub f64);

impl Power {
    pub fn watts(&self) -> f64 {
        self.0
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PowerRepr {
    Watts { w: f64 },
    DbMilliwatts { dbm: f64 },
    DbWatts { db: f64 },
}

impl Serialize for Power {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PowerRepr::Watts { w: self.0 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Power {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let watts = match PowerRepr::deserialize(deserializer)? {
            PowerRepr::Watts { w } => w,
            PowerRepr::DbMilliwatts { dbm } => 10f64.powf((dbm - 30.0) / 10.0),
            PowerRepr::DbWatts { db } => 10f64.powf(db / 10.0),
        };
        Ok(Power(watts))
    }
}

/// The sensing field: extent, propagation, source diffusion, and the ambient
/// (solar) harvesting floor available everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    /// Field extent in meters, `[width, height]`.
    pub size: (f64, f64),
    /// Path-loss exponent for both the uplink channel and harvested RF power.
    pub path_loss_exponent: f64,
    /// Source-to-sensor diffusion model parameters.
    pub diffusion: Diffusion,
    /// Location-independent harvested power (e.g. solar), watts.
    pub solar_floor: Power,
}

/// Diffusion gain model: a source at distance `d` contributes measurement gain
/// `gain * exp(-d / decay)` when `d <= cutoff`, and nothing beyond the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diffusion {
    pub gain: f64,
    /// e-folding distance, meters.
    pub decay: f64,
    /// Hard sensing range, meters.
    pub cutoff: f64,
}

/// A cellular base station whose transmit power can be harvested nearby.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub position: Point,
    /// Transmit power, watts.
    pub power: Power,
}

/// One entry of the sensor-type catalog. Index 0 of the catalog is always the
/// auxiliary "no sensor" type with zero cost, efficiency, and capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorType {
    /// Deployment cost, in the same currency unit as `budgets.cost`.
    pub cost: f64,
    /// Energy-harvesting efficiency in [0, 1].
    pub eh_efficiency: f64,
    /// Upper limit on usable harvested power (battery capacity), watts.
    pub battery_cap: Power,
}

/// One selectable operating bandwidth: its width in hertz and the number of
/// resource-grid channels it occupies. The two must be consistent with the
/// grid: `hz = grid.bandwidth * channels / grid.channel_count()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub hz: f64,
    pub channels: u32,
}

/// The time/frequency resource grid one measurement interval is divided into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceGrid {
    /// Measurement/transmission interval, seconds.
    pub interval: f64,
    /// Total system bandwidth, hertz.
    pub bandwidth: f64,
    /// Number of time channels the interval is split into.
    pub time_channels: u32,
    /// Number of frequency channels the bandwidth is split into.
    pub freq_channels: u32,
    /// Modulation factor; kept for documentation, fixed to 1 by default.
    #[serde(default = "default_modulation")]
    pub modulation: f64,
}

fn default_modulation() -> f64 {
    1.0
}

impl ResourceGrid {
    /// Total number of resource channels.
    pub fn channel_count(&self) -> u64 {
        self.time_channels as u64 * self.freq_channels as u64
    }

    /// Duration of one time channel, seconds.
    pub fn slot(&self) -> f64 {
        self.interval / self.time_channels as f64
    }

    /// Width of one frequency channel, hertz.
    pub fn channel_width(&self) -> f64 {
        self.bandwidth / self.freq_channels as f64
    }
}

/// Planning budgets: the cost cap and the two spectrum caps (which one applies
/// depends on the problem: analog plans cap the channel count, digital plans
/// cap the summed bandwidth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Total deployment cost cap.
    pub cost: f64,
    /// Total bandwidth cap, hertz.
    pub bandwidth: f64,
    /// Total channel-count cap.
    pub channels: u64,
}

/// Noise model: per-sensor measurement noise and the receiver temperature that
/// sets the per-channel thermal noise floor at the fusion center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    /// Measurement noise variance at every sensor.
    pub measurement_var: f64,
    /// Receiver (effective) noise temperature in kelvin; defaults to 290 K.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

/// First-order Gauss–Markov prior for the dynamic scalar source:
/// `theta[t] = a * theta[t-1] + u[t]`, `u ~ N(0, drive_var)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicPrior {
    /// State transition coefficient; |a| < 1.
    pub a: f64,
    /// Variance of the driving noise `u[t]`.
    pub drive_var: f64,
    /// Mean of the initial state.
    pub initial_mean: f64,
}

impl DynamicPrior {
    /// Stationary variance of the source, `drive_var / (1 - a^2)`.
    pub fn stationary_var(&self) -> f64 {
        self.drive_var / (1.0 - self.a * self.a)
    }
}

/// The immutable world description every solver and simulator consumes.
///
/// Construct via [`load_scenario`] (which validates) or literally in code
/// followed by [`Scenario::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub field: Field,
    /// Candidate sensing locations (length L >= 1).
    pub locations: Vec<Point>,
    /// Source positions (length m >= 1).
    pub sources: Vec<Point>,
    /// Fusion-center position.
    pub fc: Point,
    pub base_stations: Vec<BaseStation>,
    /// Sensor-type catalog, length K+1; index 0 is the "no sensor" type.
    pub sensor_types: Vec<SensorType>,
    /// Bandwidth catalog, length B.
    pub bandwidths: Vec<Band>,
    pub grid: ResourceGrid,
    pub budgets: Budgets,
    pub noise: Noise,
    /// Source prior covariance, m x m symmetric positive definite.
    pub static_prior: Vec<Vec<f64>>,
    pub dynamic_prior: DynamicPrior,
}

impl Scenario {
    /// Number of candidate locations L.
    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    /// Number of catalog entries K+1 (including the "no sensor" type).
    pub fn n_types(&self) -> usize {
        self.sensor_types.len()
    }

    /// Number of selectable bandwidths B.
    pub fn n_bands(&self) -> usize {
        self.bandwidths.len()
    }

    /// Number of sources m.
    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    /// Check every model invariant, naming the offending field on failure.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.locations.is_empty() {
            return Err(invariant("locations", "at least one candidate location is required"));
        }
        if self.sources.is_empty() {
            return Err(invariant("sources", "at least one source is required"));
        }
        let (w, h) = self.field.size;
        if !(w > 0.0 && h > 0.0) {
            return Err(invariant("field.size", "field extent must be positive"));
        }
        if !(self.field.path_loss_exponent > 0.0) {
            return Err(invariant("field.path_loss_exponent", "must be > 0"));
        }
        let diff = &self.field.diffusion;
        for (name, v) in [
            ("field.diffusion.gain", diff.gain),
            ("field.diffusion.decay", diff.decay),
            ("field.diffusion.cutoff", diff.cutoff),
        ] {
            if !(v > 0.0) {
                return Err(invariant(name, "must be > 0"));
            }
        }
        if !(self.field.solar_floor.watts() >= 0.0) {
            return Err(invariant("field.solar_floor", "must be >= 0 W"));
        }
        for (i, bs) in self.base_stations.iter().enumerate() {
            if !(bs.power.watts() >= 0.0) {
                return Err(invariant(format!("base_stations[{i}].power"), "must be >= 0 W"));
            }
        }

        if self.sensor_types.is_empty() {
            return Err(invariant("sensor_types", "catalog must not be empty"));
        }
        let t0 = &self.sensor_types[0];
        if t0.cost != 0.0 || t0.eh_efficiency != 0.0 || t0.battery_cap.watts() != 0.0 {
            return Err(invariant(
                "sensor_types[0]",
                "entry 0 is the \"no sensor\" type and must have zero cost, efficiency, and capacity",
            ));
        }
        for (i, ty) in self.sensor_types.iter().enumerate() {
            if !(ty.cost >= 0.0) {
                return Err(invariant(format!("sensor_types[{i}].cost"), "must be >= 0"));
            }
            if !(ty.eh_efficiency >= 0.0 && ty.eh_efficiency <= 1.0) {
                return Err(invariant(format!("sensor_types[{i}].eh_efficiency"), "must be in [0, 1]"));
            }
            if !(ty.battery_cap.watts() >= 0.0) {
                return Err(invariant(format!("sensor_types[{i}].battery_cap"), "must be >= 0 W"));
            }
        }

        if self.bandwidths.is_empty() {
            return Err(invariant("bandwidths", "catalog must not be empty"));
        }
        let grid = &self.grid;
        if grid.time_channels == 0 {
            return Err(invariant("grid.time_channels", "must be >= 1"));
        }
        if grid.freq_channels == 0 {
            return Err(invariant("grid.freq_channels", "must be >= 1"));
        }
        if !(grid.interval > 0.0) {
            return Err(invariant("grid.interval", "must be > 0 s"));
        }
        if !(grid.bandwidth > 0.0) {
            return Err(invariant("grid.bandwidth", "must be > 0 Hz"));
        }
        if !(grid.modulation > 0.0) {
            return Err(invariant("grid.modulation", "must be > 0"));
        }
        for (i, band) in self.bandwidths.iter().enumerate() {
            if !(band.hz > 0.0) {
                return Err(invariant(format!("bandwidths[{i}].hz"), "must be > 0 Hz"));
            }
            if band.channels == 0 {
                return Err(invariant(format!("bandwidths[{i}].channels"), "must be >= 1"));
            }
            let expected = grid.bandwidth * band.channels as f64 / grid.channel_count() as f64;
            if (band.hz - expected).abs() > BAND_CONSISTENCY_TOL * band.hz {
                return Err(invariant(
                    format!("bandwidths[{i}].hz"),
                    format!(
                        "inconsistent with the grid: {} channels of the {} Hz / {} channel grid span {expected} Hz, not {} Hz",
                        band.channels,
                        grid.bandwidth,
                        grid.channel_count(),
                        band.hz
                    ),
                ));
            }
        }

        if !(self.budgets.cost >= 0.0) {
            return Err(invariant("budgets.cost", "must be >= 0"));
        }
        if !(self.budgets.bandwidth > 0.0) {
            return Err(invariant("budgets.bandwidth", "must be > 0 Hz"));
        }
        if self.budgets.channels == 0 {
            return Err(invariant("budgets.channels", "must be >= 1"));
        }

        if !(self.noise.measurement_var > 0.0) {
            return Err(invariant("noise.measurement_var", "must be > 0"));
        }
        if !(self.noise.temperature > 0.0) {
            return Err(invariant("noise.temperature", "must be > 0 K"));
        }

        let m = self.sources.len();
        if self.static_prior.len() != m || self.static_prior.iter().any(|row| row.len() != m) {
            return Err(invariant(
                "static_prior",
                format!("must be a {m}x{m} matrix matching the number of sources"),
            ));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (self.static_prior[i][j], self.static_prior[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(invariant("static_prior", "must be symmetric"));
                }
            }
        }
        if !symmetric_positive_definite(&self.static_prior) {
            return Err(invariant("static_prior", "must be positive definite"));
        }

        if !(self.dynamic_prior.a.abs() < 1.0) {
            return Err(invariant("dynamic_prior.a", "must satisfy |a| < 1"));
        }
        if !(self.dynamic_prior.drive_var > 0.0) {
            return Err(invariant("dynamic_prior.drive_var", "must be > 0"));
        }
        Ok(())
    }

    /// Serialize back to pretty JSON. Power fields come out as `{"w": x}`, so
    /// `load_scenario(s.to_json())` reproduces `s` exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Cholesky feasibility probe used by validation; m is tiny (a handful of
/// sources), so a plain dense factorization is plenty.
fn symmetric_positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

/// Parse and validate a scenario document.
pub fn load_scenario(config_text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(config_text)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Uplink channel power gain between a sensing location and the fusion
/// center: `d^(-alpha)`. Errors if the points coincide (singular gain).
pub fn channel_gain(p: Point, fc: Point, alpha: f64) -> Result<f64, ScenarioError> {
    let d = p.dist(&fc);
    if d == 0.0 {
        return Err(ScenarioError::CoincidentPoints {
            context: "channel gain to fusion center".into(),
            x: p.x,
            y: p.y,
        });
    }
    Ok(d.powf(-alpha))
}

/// Measurement gain of a source seen from a sensing location:
/// `gain * exp(-d / decay)` inside the sensing range, 0 beyond it.
pub fn measurement_gain(p: Point, source: Point, diffusion: &Diffusion) -> f64 {
    let d = p.dist(&source);
    if d <= diffusion.cutoff {
        diffusion.gain * (-d / diffusion.decay).exp()
    } else {
        0.0
    }
}

/// Average power harvestable at a location: path-loss-weighted sum of base
/// station powers plus the solar floor. Errors if the location sits exactly on
/// a base station.
pub fn harvested_power(
    p: Point,
    base_stations: &[BaseStation],
    solar_floor: f64,
    alpha: f64,
) -> Result<f64, ScenarioError> {
    let mut total = solar_floor;
    for bs in base_stations {
        let d = p.dist(&bs.position);
        if d == 0.0 {
            return Err(ScenarioError::CoincidentPoints {
                context: "harvested power at a base station".into(),
                x: p.x,
                y: p.y,
            });
        }
        total += bs.power.watts() * d.powf(-alpha);
    }
    Ok(total)
}

/// Transmit power of a sensor type at a location with harvested power `rho`:
/// the harvested share, clipped by the battery capacity.
pub fn node_power(harvested: f64, ty: &SensorType) -> f64 {
    (harvested * ty.eh_efficiency).min(ty.battery_cap.watts())
}
