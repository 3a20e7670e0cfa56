//! The transit scenario: two modes, their stochastic observables (cost, travel
//! time, congestion, carbon per passenger), and the transformation of those
//! observables into perceived utilities.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gumbel, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::Schema;

/// Euler-Mascheroni constant, the mean of a standard Gumbel variate.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Number of observables, in the fixed order cost, time, congestion, carbon.
pub const OBSERVABLES: usize = 4;
pub const OBSERVABLE_NAMES: [&str; OBSERVABLES] = ["cost", "time", "congestion", "carbon"];

const MAX_TIME_DRAWS: usize = 100;
const FALLBACK_TIME: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitMode {
    Bus,
    Taxi,
}

impl TransitMode {
    pub const ALL: [TransitMode; 2] = [TransitMode::Bus, TransitMode::Taxi];

    pub fn index(self) -> usize {
        match self {
            TransitMode::Bus => 0,
            TransitMode::Taxi => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TransitMode::Bus => "bus",
            TransitMode::Taxi => "taxi",
        }
    }

    pub fn is_public(self) -> bool {
        self == TransitMode::Bus
    }
}

impl fmt::Display for TransitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The abstract values agents identify with, in schema row order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Frugalism,
    Idealism,
    Individualism,
    Pragmatism,
}

impl Value {
    pub const ALL: [Value; 4] = [
        Value::Frugalism,
        Value::Idealism,
        Value::Individualism,
        Value::Pragmatism,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Value::Frugalism => "frugalism",
            Value::Idealism => "idealism",
            Value::Individualism => "individualism",
            Value::Pragmatism => "pragmatism",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value-over-observable schema. Rows are frugalism, idealism,
/// individualism, pragmatism; columns are cost, time, congestion, carbon.
pub fn default_value_schema() -> Schema {
    Schema::new(vec![
        vec![3.0 / 5.0, 1.0 / 5.0, 1.0 / 5.0, 0.0],
        vec![1.0 / 10.0, 1.0 / 10.0, 1.0 / 10.0, 7.0 / 10.0],
        vec![2.0 / 10.0, 3.0 / 10.0, 5.0 / 10.0, 0.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
    ])
    .expect("value schema is row-stochastic")
}

/// How many passengers share the vehicle on a trip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OccupancyModel {
    /// `(occupancy, probability)` pairs.
    Categorical { probabilities: Vec<(u32, f64)> },
    /// Normal draw, rounded to the nearest integer and clamped to
    /// `[1, max_occupancy]`.
    Gaussian { mean: f64, variance: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeParameters {
    pub cost: f64,
    /// Minutes.
    pub time_mean: f64,
    /// Minutes squared (or minutes, see [`TimeSpread`]).
    pub time_var: f64,
    pub seating_capacity: u32,
    pub max_occupancy: u32,
    pub occupancy: OccupancyModel,
    /// Grams CO2 per km.
    pub emission_rate: f64,
}

impl ModeParameters {
    pub fn bus() -> Self {
        ModeParameters {
            cost: 20.0,
            time_mean: 47.0,
            time_var: 10.0,
            seating_capacity: 40,
            max_occupancy: 80,
            occupancy: OccupancyModel::Gaussian {
                mean: 40.0,
                variance: 25.0,
            },
            emission_rate: 200.0,
        }
    }

    pub fn taxi() -> Self {
        ModeParameters {
            cost: 300.0,
            time_mean: 20.0,
            time_var: 5.0,
            seating_capacity: 4,
            max_occupancy: 5,
            occupancy: OccupancyModel::Categorical {
                probabilities: vec![(1, 0.1), (2, 0.2), (3, 0.3), (4, 0.3), (5, 0.1)],
            },
            emission_rate: 40.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let bad = |name: &str, reason: String| Error::validation(format!("{field}.{name}"), reason);
        if self.seating_capacity < 1 {
            return Err(bad("seating_capacity", "must be at least 1".into()));
        }
        if self.max_occupancy < self.seating_capacity {
            return Err(bad(
                "max_occupancy",
                format!("must be >= seating_capacity ({})", self.seating_capacity),
            ));
        }
        if !(self.cost >= 0.0 && self.cost.is_finite()) {
            return Err(bad("cost", "must be a finite non-negative number".into()));
        }
        if !(self.time_mean.is_finite() && self.time_mean > 0.0) {
            return Err(bad("time_mean", "must be positive".into()));
        }
        if !(self.time_var > 0.0 && self.time_var.is_finite()) {
            return Err(bad("time_var", "must be positive".into()));
        }
        if !(self.emission_rate >= 0.0 && self.emission_rate.is_finite()) {
            return Err(bad("emission_rate", "must be non-negative".into()));
        }
        match &self.occupancy {
            OccupancyModel::Categorical { probabilities } => {
                if probabilities.is_empty() {
                    return Err(bad("occupancy", "categorical model has no outcomes".into()));
                }
                for &(k, p) in probabilities {
                    if k < 1 || k > self.max_occupancy {
                        return Err(bad(
                            "occupancy",
                            format!("occupancy {k} outside [1, {}]", self.max_occupancy),
                        ));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(bad("occupancy", format!("probability {p} outside [0, 1]")));
                    }
                }
                let total: f64 = probabilities.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(bad("occupancy", format!("probabilities sum to {total}")));
                }
            }
            OccupancyModel::Gaussian { mean, variance } => {
                if !mean.is_finite() || !(*variance >= 0.0 && variance.is_finite()) {
                    return Err(bad(
                        "occupancy",
                        "gaussian needs finite mean, variance >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Mean occupancy of the model, before rounding effects.
    pub fn mean_occupancy(&self) -> f64 {
        match &self.occupancy {
            OccupancyModel::Categorical { probabilities } => {
                probabilities.iter().map(|&(k, p)| k as f64 * p).sum()
            }
            OccupancyModel::Gaussian { mean, .. } => mean.clamp(1.0, self.max_occupancy as f64),
        }
    }
}

/// Whether `time_var` holds a variance (minutes squared) or a standard
/// deviation (minutes).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSpread {
    #[default]
    Variance,
    StdDev,
}

/// Everything needed to generate a trip observation for either mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitParams {
    pub bus: ModeParameters,
    pub taxi: ModeParameters,
    pub trip_distance_km: f64,
    pub time_spread: TimeSpread,
}

impl Default for TransitParams {
    fn default() -> Self {
        TransitParams {
            bus: ModeParameters::bus(),
            taxi: ModeParameters::taxi(),
            trip_distance_km: 10.0,
            time_spread: TimeSpread::Variance,
        }
    }
}

impl TransitParams {
    pub fn mode(&self, mode: TransitMode) -> &ModeParameters {
        match mode {
            TransitMode::Bus => &self.bus,
            TransitMode::Taxi => &self.taxi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bus.validate("modes.bus")?;
        self.taxi.validate("modes.taxi")?;
        if !(self.trip_distance_km > 0.0 && self.trip_distance_km.is_finite()) {
            return Err(Error::validation(
                "modes.trip_distance_km",
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn travel_time(&self, mode: TransitMode) -> TravelTime {
        let p = self.mode(mode);
        let variance = match self.time_spread {
            TimeSpread::Variance => p.time_var,
            TimeSpread::StdDev => p.time_var * p.time_var,
        };
        TravelTime::from_moments(p.time_mean, variance)
    }
}

/// Right-skewed Gumbel travel time, parameterized by moment matching:
/// `mean = location + EULER_GAMMA * scale`, `var = pi^2 scale^2 / 6`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TravelTime {
    pub location: f64,
    pub scale: f64,
}

impl TravelTime {
    pub fn from_moments(mean: f64, variance: f64) -> Self {
        let scale = (6.0 * variance).sqrt() / PI;
        TravelTime {
            location: mean - EULER_GAMMA * scale,
            scale,
        }
    }

    /// Draws a positive travel time, redrawing non-positive values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gumbel = match Gumbel::new(self.location, self.scale) {
            Ok(g) => g,
            // zero scale: the distribution collapses onto its mean
            Err(_) => return self.location.max(FALLBACK_TIME),
        };
        for _ in 0..MAX_TIME_DRAWS {
            let t = gumbel.sample(rng);
            if t > 0.0 {
                return t;
            }
        }
        log::warn!(
            "travel time Gumbel(location={}, scale={}) produced {MAX_TIME_DRAWS} non-positive draws; clamping to {FALLBACK_TIME} min",
            self.location,
            self.scale
        );
        FALLBACK_TIME
    }
}

pub fn sample_time<R: Rng + ?Sized>(params: &TransitParams, mode: TransitMode, rng: &mut R) -> f64 {
    params.travel_time(mode).sample(rng)
}

/// Inverts the categorical CDF at `u` in `[0, 1)`.
pub fn occupancy_from_uniform(probabilities: &[(u32, f64)], u: f64) -> u32 {
    let mut cumulative = 0.0;
    for &(k, p) in probabilities {
        cumulative += p;
        if u < cumulative {
            return k;
        }
    }
    // u beyond the last cumulative value through rounding
    probabilities.last().map(|&(k, _)| k).unwrap_or(1)
}

/// Rounds a raw Gaussian occupancy draw and clamps it to `[1, max_occupancy]`.
pub fn clamp_occupancy(raw: f64, max_occupancy: u32) -> u32 {
    raw.round().clamp(1.0, max_occupancy as f64) as u32
}

pub fn sample_occupancy<R: Rng + ?Sized>(mode_params: &ModeParameters, rng: &mut R) -> u32 {
    match &mode_params.occupancy {
        OccupancyModel::Categorical { probabilities } => {
            occupancy_from_uniform(probabilities, rng.random::<f64>())
        }
        OccupancyModel::Gaussian { mean, variance } => {
            let raw = Normal::new(*mean, variance.sqrt())
                .map(|n| n.sample(rng))
                .unwrap_or(*mean);
            clamp_occupancy(raw, mode_params.max_occupancy)
        }
    }
}

pub fn congestion(occupancy: u32, seating_capacity: u32) -> f64 {
    occupancy as f64 / seating_capacity as f64
}

/// Grams of CO2 attributed to each passenger.
pub fn carbon_footprint(distance_km: f64, emission_rate: f64, occupancy: u32) -> f64 {
    distance_km * emission_rate / occupancy as f64
}

/// Realized observables of one trip on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripObservation {
    pub cost: f64,
    pub time: f64,
    pub congestion: f64,
    pub carbon: f64,
}

impl TripObservation {
    /// Builds an observation from a given travel time and occupancy.
    pub fn compose(params: &TransitParams, mode: TransitMode, time: f64, occupancy: u32) -> Self {
        let p = params.mode(mode);
        TripObservation {
            cost: p.cost,
            time,
            congestion: congestion(occupancy, p.seating_capacity),
            carbon: carbon_footprint(params.trip_distance_km, p.emission_rate, occupancy),
        }
    }

    /// Observation at the mean travel time and mean occupancy.
    pub fn expected(params: &TransitParams, mode: TransitMode) -> Self {
        let p = params.mode(mode);
        let occupancy = p.mean_occupancy();
        TripObservation {
            cost: p.cost,
            time: p.time_mean,
            congestion: occupancy / p.seating_capacity as f64,
            carbon: params.trip_distance_km * p.emission_rate / occupancy,
        }
    }
}

/// Samples a trip: travel time first, then one occupancy draw that feeds
/// both congestion and carbon.
pub fn observe_trip<R: Rng + ?Sized>(
    mode: TransitMode,
    params: &TransitParams,
    rng: &mut R,
) -> TripObservation {
    let time = sample_time(params, mode, rng);
    let occupancy = sample_occupancy(params.mode(mode), rng);
    TripObservation::compose(params, mode, time, occupancy)
}

/// Per-observable reals for cost, time and carbon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableScalars {
    pub cost: f64,
    pub time: f64,
    pub carbon: f64,
}

/// Prospect-theory perception of observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionParams {
    pub reference: ObservableScalars,
    pub scale: ObservableScalars,
    /// Curvature for gains.
    pub alpha: f64,
    /// Curvature for losses.
    pub beta: f64,
    /// Loss aversion.
    pub lambda: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        PerceptionParams {
            // Cost and time are anchored a quarter of the inter-mode gap
            // from the taxi; carbon at the single-passenger taxi worst case.
            reference: ObservableScalars {
                cost: 230.0,
                time: 25.0,
                carbon: 400.0,
            },
            scale: ObservableScalars {
                cost: 70.0,
                time: 6.75,
                carbon: 350.0,
            },
            alpha: 0.88,
            beta: 0.88,
            lambda: 2.25,
        }
    }
}

impl PerceptionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::validation("perception.alpha", "must lie in (0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::validation("perception.beta", "must lie in (0, 1]"));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(Error::validation("perception.lambda", "must be >= 1"));
        }
        for (name, s) in [
            ("cost", self.scale.cost),
            ("time", self.scale.time),
            ("carbon", self.scale.carbon),
        ] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::validation(
                    format!("perception.scale.{name}"),
                    "must be positive",
                ));
            }
        }
        for (name, r) in [
            ("cost", self.reference.cost),
            ("time", self.reference.time),
            ("carbon", self.reference.carbon),
        ] {
            if !r.is_finite() {
                return Err(Error::validation(
                    format!("perception.reference.{name}"),
                    "must be finite",
                ));
            }
        }
        Ok(())
    }
}

/// Prospect-theory value of a cost-like observable `x`.
///
/// The gain is `g = (reference - x) / scale`; the value is `g^alpha` for
/// gains and `-lambda (-g)^beta` for losses.
pub fn prospect_value(x: f64, reference: f64, scale: f64, params: &PerceptionParams) -> f64 {
    let g = (reference - x) / scale;
    if g >= 0.0 {
        g.powf(params.alpha)
    } else {
        -params.lambda * (-g).powf(params.beta)
    }
}

/// Shifted ReLU: 1 while everyone is seated, decreasing linearly once
/// occupancy exceeds seating.
pub fn congestion_utility(congestion: f64) -> f64 {
    2.0 - congestion.max(1.0)
}

/// Perceived utilities ordered `[cost, time, congestion, carbon]`.
pub fn perceive(observation: &TripObservation, params: &PerceptionParams) -> [f64; OBSERVABLES] {
    let r = &params.reference;
    let s = &params.scale;
    [
        prospect_value(observation.cost, r.cost, s.cost, params),
        prospect_value(observation.time, r.time, s.time, params),
        congestion_utility(observation.congestion),
        prospect_value(observation.carbon, r.carbon, s.carbon, params),
    ]
}
