//! Record-similarity privacy metrics: distance to closest record (DCR) and
//! identifiability.

use serde::Serialize;

use crate::dataset::Table;
use crate::distance::{nn_with_plan, DistanceSpec, Plan, WeightVector};
use crate::error::{Error, Result};

/// How per-record closest distances are collapsed into one DCR value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DcrAggregate {
    Mean,
    Median,
}

/// Distance-to-closest-record result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcrReport {
    pub aggregate: DcrAggregate,
    /// Aggregated distance; 0 means some synthetic records are exact copies.
    pub value: f64,
    /// Per-synthetic-record distance to its closest real record, in
    /// synthetic row order.
    pub distances: Vec<f64>,
}

/// Median with the even-length convention: mean of the two middle order
/// statistics.
pub(crate) fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Distance to closest record: for every synthetic record, the distance to
/// its nearest real record under `spec`, aggregated by mean or median.
/// Lower values mean the synthetic table sits closer to real records.
pub fn dcr(real: &Table, synth: &Table, spec: &DistanceSpec, aggregate: DcrAggregate) -> Result<DcrReport> {
    if real.is_empty() || synth.is_empty() {
        return Err(Error::EmptyInput("dcr needs non-empty real and synthetic tables".into()));
    }
    let nn = crate::distance::nn_between(synth, real, spec)?;
    let distances = nn.distances();
    let value = match aggregate {
        DcrAggregate::Mean => distances.iter().sum::<f64>() / distances.len() as f64,
        DcrAggregate::Median => median(&distances),
    };
    Ok(DcrReport { aggregate, value, distances })
}

/// Which side of the real/synthetic pairing identifiability counts over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsIdOrientation {
    /// For each real record r: identifiable iff its nearest synthetic
    /// record is closer than r's nearest other real record. Fraction over
    /// real records.
    PerTrueRecord,
    /// For each synthetic record s with nearest real record r: s identifies
    /// r iff d(s, r) is below r's nearest-real-neighbour distance. Fraction
    /// over synthetic records.
    PerSyntheticRecord,
}

/// Identifiability result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsIdReport {
    /// Fraction of records deemed identifiable, in [0, 1].
    pub value: f64,
    pub orientation: EpsIdOrientation,
    /// The column weights the distances used.
    pub weights: WeightVector,
    /// Number of identifiable records (the numerator).
    pub identifiable: usize,
    /// Number of records scored (the denominator).
    pub total: usize,
}

/// Identifiability: the fraction of records whose synthetic neighbour is
/// strictly closer than their nearest real neighbour.
///
/// Distances are weighted Euclidean over numeric columns plus weighted
/// mismatch over categorical ones:
/// `d(a, b) = sqrt(sum_num w_j (a_j - b_j)^2 + sum_cat w_j 1[a_j != b_j])`,
/// with `weights` typically from [`crate::inverse_entropy_weights`] so that
/// rare-information columns count more.
pub fn epsilon_identifiability(
    real: &Table,
    synth: &Table,
    weights: &WeightVector,
    orientation: EpsIdOrientation,
) -> Result<EpsIdReport> {
    if real.len() < 2 {
        return Err(Error::EmptyInput(
            "identifiability needs at least 2 real records to define within-real distances".into(),
        ));
    }
    if synth.is_empty() {
        return Err(Error::EmptyInput("identifiability needs a non-empty synthetic table".into()));
    }
    if real.schema() != synth.schema() {
        return Err(Error::SpecMismatch("real and synthetic schemas differ".into()));
    }
    real.reject_any_missing("epsilon_identifiability")?;
    synth.reject_any_missing("epsilon_identifiability")?;

    let plan = Plan::compile_mixed_root_squared(weights, real.schema())?;
    // r_i: distance from real record i to its nearest other real record.
    let within = nn_with_plan(&plan, real, real, true)?;

    let (identifiable, total) = match orientation {
        EpsIdOrientation::PerTrueRecord => {
            let to_synth = nn_with_plan(&plan, real, synth, false)?;
            let count = within
                .entries
                .iter()
                .zip(&to_synth.entries)
                .filter(|(r, s)| s.distance < r.distance)
                .count();
            (count, real.len())
        }
        EpsIdOrientation::PerSyntheticRecord => {
            let to_real = nn_with_plan(&plan, synth, real, false)?;
            let count = to_real
                .entries
                .iter()
                .filter(|e| e.distance < within.entries[e.index].distance)
                .count();
            (count, synth.len())
        }
    };

    Ok(EpsIdReport {
        value: identifiable as f64 / total as f64,
        orientation,
        weights: weights.clone(),
        identifiable,
        total,
    })
}
