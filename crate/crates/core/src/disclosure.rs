//! Identity-disclosure risk: how often a synthetic table lets an adversary
//! single out a real record through its quasi-identifiers and then learn
//! something sensitive about it.

use std::collections::HashMap;

use crate::dataset::{Table, Value};
use crate::error::{Error, Result};
use crate::report::{canonical_json, sha256_hex};

/// Hashable projection of a row onto a set of columns. Numeric cells key by
/// their bit pattern with `-0.0` folded into `0.0`; missing cells are not
/// representable and must be rejected before key construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum KeyPart {
    Num(u64),
    Cat(String),
}

fn key_for(row: &[Value], columns: &[usize]) -> Vec<KeyPart> {
    columns
        .iter()
        .map(|&c| match &row[c] {
            Value::Num(v) => {
                let v = if *v == 0.0 { 0.0 } else { *v };
                KeyPart::Num(v.to_bits())
            }
            Value::Cat(s) => KeyPart::Cat(s.clone()),
            Value::Missing => unreachable!("missing cells rejected before keying"),
        })
        .collect()
}

/// For each row of `t`, the number of rows (itself included) sharing its
/// value tuple on `columns`. Missing cells in those columns are an error.
pub fn equivalence_class_sizes(t: &Table, columns: &[usize]) -> Result<Vec<usize>> {
    if columns.is_empty() {
        return Err(Error::Config("equivalence classes need at least one column".into()));
    }
    for &c in columns {
        if c >= t.schema().len() {
            return Err(Error::Config(format!(
                "column index {c} out of range for {} columns",
                t.schema().len()
            )));
        }
    }
    t.reject_missing(columns, "equivalence_class_sizes")?;
    let mut counts: HashMap<Vec<KeyPart>, usize> = HashMap::new();
    for row in t.rows() {
        *counts.entry(key_for(row, columns)).or_insert(0) += 1;
    }
    Ok(t.rows().map(|row| counts[&key_for(row, columns)]).collect())
}

/// Where the per-record population frequency `F_t` comes from.
#[derive(Debug, Clone)]
pub enum PopulationModel {
    /// Count the quasi-identifier tuple in an explicit population table
    /// (same schema as the data). A real record whose tuple is absent from
    /// the population is an error: the population must contain its members.
    Table(Table),
    /// Estimate from the real table itself: `F_t = max(1, ceil(s_t / f))`
    /// where `s_t` is the record's equivalence-class size in the real table
    /// and `f` is the fraction of the population the real table samples.
    ScaledEstimate { sampling_fraction: f64 },
}

/// Identity-disclosure configuration.
#[derive(Debug, Clone)]
pub struct IdrConfig {
    /// Quasi-identifier column names (what an adversary can link on).
    pub quasi: Vec<String>,
    /// Sensitive column names (what a match would reveal).
    pub sensitive: Vec<String>,
    /// Importance weight applied to every disclosure, `λ ≥ 0`.
    pub lambda: f64,
    pub population: PopulationModel,
}

/// Identity-disclosure result.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IdrReport {
    /// Mean over real records of `(1 / F_t) · I_t · λ · R_t`.
    pub value: f64,
    /// Real records whose quasi tuple occurs in the synthetic table (`I_t = 1`).
    pub matched: usize,
    /// Matched records where some matching synthetic record also agrees on
    /// at least one sensitive value (`R_t = 1`).
    pub revealed: usize,
    pub config_digest: String,
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Num(x), Value::Num(y)) => x == y,
        (Value::Cat(x), Value::Cat(y)) => x == y,
        _ => false,
    }
}

/// Identity-disclosure risk of a synthetic table with respect to the real
/// records it was trained on.
///
/// Per real record `t`: `F_t` is its population frequency on the quasi
/// identifiers (rarer records are riskier), `I_t` indicates that some
/// synthetic record carries exactly the same quasi tuple, and `R_t`
/// indicates that at least one of those matching synthetic records agrees
/// with `t` on one or more sensitive values. The reported value is the mean
/// of `(1 / F_t) · I_t · λ · R_t`, in `[0, λ]`.
pub fn idr(real: &Table, synth: &Table, cfg: &IdrConfig) -> Result<IdrReport> {
    if real.is_empty() || synth.is_empty() {
        return Err(Error::EmptyInput("identity disclosure needs non-empty tables".into()));
    }
    if real.schema() != synth.schema() {
        return Err(Error::SpecMismatch("real and synthetic schemas differ".into()));
    }
    if !cfg.lambda.is_finite() || cfg.lambda < 0.0 {
        return Err(Error::Config(format!("λ must be finite and non-negative, got {}", cfg.lambda)));
    }
    let schema = real.schema();
    let quasi = resolve_columns(schema, &cfg.quasi, "quasi-identifier")?;
    let sensitive = resolve_columns(schema, &cfg.sensitive, "sensitive")?;
    if let Some(both) = quasi.iter().find(|c| sensitive.contains(c)) {
        return Err(Error::Config(format!(
            "column {:?} is listed as both quasi-identifier and sensitive",
            schema.column(*both).name
        )));
    }
    let scored: Vec<usize> = quasi.iter().chain(&sensitive).copied().collect();
    real.reject_missing(&scored, "idr real table")?;
    synth.reject_missing(&scored, "idr synthetic table")?;

    // Index synthetic rows by quasi tuple.
    let mut synth_index: HashMap<Vec<KeyPart>, Vec<usize>> = HashMap::new();
    for (i, row) in synth.rows().enumerate() {
        synth_index.entry(key_for(row, &quasi)).or_default().push(i);
    }

    let frequencies = population_frequencies(real, &quasi, &cfg.population)?;

    let mut sum = 0.0;
    let mut matched = 0usize;
    let mut revealed = 0usize;
    for (row, &f_t) in real.rows().zip(&frequencies) {
        let Some(matches) = synth_index.get(&key_for(row, &quasi)) else {
            continue;
        };
        matched += 1;
        let agrees = matches.iter().any(|&j| {
            let s_row = synth.row(j);
            sensitive.iter().any(|&c| values_equal(&row[c], &s_row[c]))
        });
        if agrees {
            revealed += 1;
            sum += cfg.lambda / f_t as f64;
        }
    }

    let digest_input = serde_json::json!({
        "metric": "identity_disclosure",
        "quasi": cfg.quasi,
        "sensitive": cfg.sensitive,
        "lambda": cfg.lambda,
        "population": match &cfg.population {
            PopulationModel::Table(t) => serde_json::json!({ "mode": "table", "rows": t.len() }),
            PopulationModel::ScaledEstimate { sampling_fraction } => {
                serde_json::json!({ "mode": "scaled_estimate", "sampling_fraction": sampling_fraction })
            }
        },
    });
    Ok(IdrReport {
        value: sum / real.len() as f64,
        matched,
        revealed,
        config_digest: sha256_hex(&canonical_json(&digest_input)),
    })
}

fn resolve_columns(
    schema: &crate::dataset::Schema,
    names: &[String],
    what: &str,
) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Err(Error::Config(format!("at least one {what} column is required")));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let idx = schema.index_of(name)?;
        if out.contains(&idx) {
            return Err(Error::Config(format!("{what} columns repeat {:?}", name)));
        }
        out.push(idx);
    }
    Ok(out)
}

fn population_frequencies(
    real: &Table,
    quasi: &[usize],
    model: &PopulationModel,
) -> Result<Vec<usize>> {
    match model {
        PopulationModel::Table(pop) => {
            if pop.schema() != real.schema() {
                return Err(Error::Population("population table schema differs from the data".into()));
            }
            pop.reject_missing(quasi, "idr population table")?;
            let mut counts: HashMap<Vec<KeyPart>, usize> = HashMap::new();
            for row in pop.rows() {
                *counts.entry(key_for(row, quasi)).or_insert(0) += 1;
            }
            real.rows()
                .enumerate()
                .map(|(i, row)| {
                    counts.get(&key_for(row, quasi)).copied().ok_or_else(|| {
                        Error::Population(format!(
                            "record {i}'s quasi-identifier tuple does not occur in the population table"
                        ))
                    })
                })
                .collect()
        }
        PopulationModel::ScaledEstimate { sampling_fraction } => {
            let f = *sampling_fraction;
            if !f.is_finite() || f <= 0.0 || f > 1.0 {
                return Err(Error::Config(format!(
                    "sampling fraction must lie in (0, 1], got {f}"
                )));
            }
            let sizes = equivalence_class_sizes(real, quasi)?;
            Ok(sizes.iter().map(|&s| ((s as f64 / f).ceil() as usize).max(1)).collect())
        }
    }
}
