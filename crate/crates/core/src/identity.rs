//! Identity machinery: attenuation of identity objects by semantic distance,
//! schema-mediated utility, per-identity marginal utility, and the epoch-wise
//! distance adaptation with stabilization detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on schema row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// An agent's elastic sense of self: identity objects, semantic distance to
/// each, and the transcendence level `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityProfile {
    identity_objects: Vec<String>,
    distances: Vec<f64>,
    gamma: f64,
}

impl IdentityProfile {
    pub fn new(identity_objects: Vec<String>, distances: Vec<f64>, gamma: f64) -> Result<Self> {
        if identity_objects.len() != distances.len() {
            return Err(Error::DimensionMismatch {
                expected: identity_objects.len(),
                actual: distances.len(),
            });
        }
        if identity_objects.is_empty() {
            return Err(Error::InvalidProfile("no identity objects".into()));
        }
        if let Some(d) = distances.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidProfile(format!(
                "semantic distance {d} is not a finite non-negative number"
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidProfile(format!(
                "gamma {gamma} outside [0, 1]"
            )));
        }
        Ok(IdentityProfile {
            identity_objects,
            distances,
            gamma,
        })
    }

    /// Profile whose identity objects are labelled `o0, o1, ...`.
    pub fn unlabelled(distances: Vec<f64>, gamma: f64) -> Result<Self> {
        let labels = (0..distances.len()).map(|i| format!("o{i}")).collect();
        Self::new(labels, distances, gamma)
    }

    pub fn identity_objects(&self) -> &[String] {
        &self.identity_objects
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// Row-stochastic `m x n` matrix expressing each identity object as a
/// distribution over contextual observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Schema {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl Schema {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidSchema("schema has no rows".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidSchema("schema has no columns".into()));
        }
        let mut weights = Vec::with_capacity(m * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSchema(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(0.0..=1.0).contains(*w)) {
                return Err(Error::InvalidSchema(format!(
                    "row {i} has entry {w} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidSchema(format!(
                    "row {i} sums to {sum}, not 1"
                )));
            }
            weights.extend_from_slice(row);
        }
        Ok(Schema {
            rows: m,
            cols: n,
            weights,
        })
    }

    /// The `n x n` identity schema: identity objects coincide with observables.
    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        Schema {
            rows: n,
            cols: n,
            weights,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.weights
            .chunks(self.cols)
            .map(<[f64]>::to_vec)
            .collect()
    }

    fn check_utils(&self, observable_utils: &[f64]) -> Result<()> {
        if observable_utils.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: observable_utils.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Schema {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Schema::new(rows)
    }
}

impl From<Schema> for Vec<Vec<f64>> {
    fn from(schema: Schema) -> Self {
        schema.to_rows()
    }
}

/// Normalized attenuation factors `gamma^d_i / sum_j gamma^d_j`.
///
/// `0^0` is taken as 1, so a `gamma = 0` agent still weights the identity
/// objects at distance zero.
pub fn attenuation_weights(profile: &IdentityProfile) -> Result<Vec<f64>> {
    let gamma = profile.gamma();
    let raw: Vec<f64> = profile
        .distances()
        .iter()
        .map(|&d| if d == 0.0 { 1.0 } else { gamma.powf(d) })
        .collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateProfile);
    }
    Ok(raw.into_iter().map(|r| r / total).collect())
}

/// Utility of a choice as seen through the agent's identity: `w^T S u`.
pub fn perceived_utility(
    profile: &IdentityProfile,
    schema: &Schema,
    observable_utils: &[f64],
) -> Result<f64> {
    if schema.rows() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            actual: schema.rows(),
        });
    }
    schema.check_utils(observable_utils)?;
    let w = attenuation_weights(profile)?;

    // (w^T S) first, then dot with u.
    let mut mixed = vec![0.0; schema.cols()];
    for (i, wi) in w.iter().enumerate() {
        for (m, s) in mixed.iter_mut().zip(schema.row(i)) {
            *m += wi * s;
        }
    }
    Ok(mixed.iter().zip(observable_utils).map(|(m, u)| m * u).sum())
}

/// Single-run utility attributed to identity object `identity_index`:
/// the dot product of its schema row with the observable utilities.
pub fn marginal_identity_utility(
    schema: &Schema,
    identity_index: usize,
    observable_utils: &[f64],
) -> Result<f64> {
    if identity_index >= schema.rows() {
        return Err(Error::IndexOutOfRange {
            index: identity_index,
            len: schema.rows(),
        });
    }
    schema.check_utils(observable_utils)?;
    Ok(dot(schema.row(identity_index), observable_utils))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-identity utility accumulated over the runs of one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLedger {
    per_identity_utility: Vec<f64>,
    runs_recorded: usize,
}

impl EpochLedger {
    pub fn new(identities: usize) -> Self {
        EpochLedger {
            per_identity_utility: vec![0.0; identities],
            runs_recorded: 0,
        }
    }

    pub fn per_identity_utility(&self) -> &[f64] {
        &self.per_identity_utility
    }

    pub fn runs_recorded(&self) -> usize {
        self.runs_recorded
    }

    /// Adds one run's marginal identity utilities.
    pub fn record_run(&mut self, schema: &Schema, observable_utils: &[f64]) -> Result<()> {
        if schema.rows() != self.per_identity_utility.len() {
            return Err(Error::DimensionMismatch {
                expected: self.per_identity_utility.len(),
                actual: schema.rows(),
            });
        }
        schema.check_utils(observable_utils)?;
        for (i, acc) in self.per_identity_utility.iter_mut().enumerate() {
            *acc += dot(schema.row(i), observable_utils);
        }
        self.runs_recorded += 1;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.per_identity_utility.iter_mut().for_each(|u| *u = 0.0);
        self.runs_recorded = 0;
    }
}

/// Parameters of the epoch-boundary distance update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptationParams {
    /// Epoch-utility threshold.
    pub threshold: f64,
    /// Distance increment per epoch.
    pub step: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Consecutive no-change epochs needed to call an agent stabilized.
    pub stabilization_window: usize,
}

impl Default for AdaptationParams {
    fn default() -> Self {
        AdaptationParams {
            threshold: 0.0,
            step: 0.1,
            d_min: 0.0,
            d_max: 10.0,
            stabilization_window: 5,
        }
    }
}

impl AdaptationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::validation(
                "adaptation.step",
                "must be a positive number",
            ));
        }
        if !(self.d_min >= 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return Err(Error::validation(
                "adaptation.d_min",
                format!(
                    "need 0 <= d_min < d_max < inf, got d_min = {}, d_max = {}",
                    self.d_min, self.d_max
                ),
            ));
        }
        if self.stabilization_window == 0 {
            return Err(Error::validation(
                "adaptation.stabilization_window",
                "must be at least 1",
            ));
        }
        if self.threshold.is_nan() {
            return Err(Error::validation("adaptation.threshold", "must not be NaN"));
        }
        Ok(())
    }
}

/// Applies the epoch-boundary rule: an identity whose epoch utility exceeds
/// the threshold moves one step closer, one that falls below moves one step
/// away, ties stay put. Results are clamped to `[d_min, d_max]`.
///
/// Returns the new profile and, per identity, whether its distance changed.
pub fn update_distances(
    profile: &IdentityProfile,
    ledger: &EpochLedger,
    params: &AdaptationParams,
    epoch_length: usize,
) -> Result<(IdentityProfile, Vec<bool>)> {
    if ledger.runs_recorded() != epoch_length {
        return Err(Error::IncompleteEpoch {
            recorded: ledger.runs_recorded(),
            expected: epoch_length,
        });
    }
    if ledger.per_identity_utility().len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            actual: ledger.per_identity_utility().len(),
        });
    }
    let mut changed = Vec::with_capacity(profile.len());
    let distances = profile
        .distances()
        .iter()
        .zip(ledger.per_identity_utility())
        .map(|(&d, &u)| {
            let moved = if u > params.threshold {
                d - params.step
            } else if u < params.threshold {
                d + params.step
            } else {
                d
            };
            let clamped = moved.clamp(params.d_min, params.d_max);
            changed.push(clamped != d);
            clamped
        })
        .collect();
    let updated = IdentityProfile {
        identity_objects: profile.identity_objects.clone(),
        distances,
        gamma: profile.gamma,
    };
    Ok((updated, changed))
}

/// True iff the last `stabilization_window` epochs changed no distance.
pub fn is_stabilized(history: &[Vec<bool>], params: &AdaptationParams) -> bool {
    let window = params.stabilization_window;
    history.len() >= window
        && history[history.len() - window..]
            .iter()
            .all(|epoch| epoch.iter().all(|c| !c))
}
