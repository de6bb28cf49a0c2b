//! Result envelopes: canonical JSON rendering, configuration digests, and
//! bounds-checked metric reports that serialize byte-identically for
//! identical inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Renders a JSON value canonically: object keys sorted, no whitespace,
/// and real numbers rounded to at most 12 significant digits and printed in
/// their shortest round-trip form. Two structurally equal values always
/// render to the same bytes.
pub fn canonical_json(value: &serde_json::Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let f = n.as_f64().expect("a JSON number is integral or finite");
                out.push_str(&format_real(f));
            }
        }
        serde_json::Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"))
        }
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            let sorted: BTreeMap<&String, &serde_json::Value> = map.iter().collect();
            out.push('{');
            for (i, (key, val)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push(':');
                write_canonical(val, out);
            }
            out.push('}');
        }
    }
}

/// Rounds to at most `sig` significant digits.
fn round_sig(x: f64, sig: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let shift = (sig - 1 - magnitude).clamp(-300, 300);
    let factor = 10f64.powi(shift);
    (x * factor).round() / factor
}

fn format_real(x: f64) -> String {
    let rounded = round_sig(x, 12);
    // The shortest decimal that round-trips to this f64.
    let mut s = format!("{rounded}");
    // serde_json parses "1.0" and "1" to the same value; keep the integer
    // form unambiguous as a real is unnecessary — shortest form wins.
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// SHA-256 of a string, lowercase hex.
pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Digest of a configuration value: SHA-256 over its canonical rendering.
pub fn config_digest(config: &serde_json::Value) -> String {
    sha256_hex(&canonical_json(config))
}

/// Valid range for a reported value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBounds {
    pub lo: f64,
    /// `None` means unbounded above.
    pub hi: Option<f64>,
}

impl ValueBounds {
    /// `[0, 1]`, the range of rates, probabilities and normalized risks.
    pub const UNIT: ValueBounds = ValueBounds { lo: 0.0, hi: Some(1.0) };
    /// `[0, ∞)`, the range of distances.
    pub const NON_NEGATIVE: ValueBounds = ValueBounds { lo: 0.0, hi: None };

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && self.hi.map_or(true, |hi| v <= hi)
    }
}

/// A named value inside a report, with the range it must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportedValue {
    pub value: f64,
    pub bounds: ValueBounds,
}

/// The envelope every metric run produces: the values with their ranges,
/// the full configuration, a digest of that configuration (so two reports
/// are comparable at a glance), the seed if randomness was involved, and
/// provenance. Serialization is canonical, so identical runs produce
/// byte-identical reports except for the timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    /// Named results, e.g. `"value"`, `"auroc"`, `"recall"`.
    pub values: BTreeMap<String, ReportedValue>,
    /// The exact configuration the run used, fully resolved.
    pub config: serde_json::Value,
    /// SHA-256 of the canonical configuration (the timestamp is not part of
    /// the configuration, so reruns agree).
    pub config_digest: String,
    /// RNG seed, when the metric drew random numbers.
    pub seed: Option<u64>,
    /// Crate version that produced the report.
    pub version: String,
    /// RFC 3339 creation time; the only field that differs between reruns.
    pub timestamp: String,
}

impl MetricReport {
    /// Builds a report, checking that every value is finite and inside its
    /// bounds.
    pub fn new(
        metric: impl Into<String>,
        values: Vec<(&str, f64, ValueBounds)>,
        config: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<MetricReport> {
        let metric = metric.into();
        let mut map = BTreeMap::new();
        for (name, value, bounds) in values {
            if !value.is_finite() {
                return Err(Error::Report(format!("{metric}: {name} is not finite ({value})")));
            }
            if !bounds.contains(value) {
                return Err(Error::Report(format!(
                    "{metric}: {name} = {value} violates its bounds [{}, {}]",
                    bounds.lo,
                    bounds.hi.map_or("∞".to_string(), |h| h.to_string()),
                )));
            }
            if map.insert(name.to_string(), ReportedValue { value, bounds }).is_some() {
                return Err(Error::Report(format!("{metric}: duplicate value name {name:?}")));
            }
        }
        if map.is_empty() {
            return Err(Error::Report(format!("{metric}: report carries no values")));
        }
        Ok(MetricReport {
            metric,
            config_digest: config_digest(&config),
            config,
            values: map,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    /// One canonical line of JSON.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports always serialize");
        canonical_json(&value)
    }

    pub fn from_json(text: &str) -> Result<MetricReport> {
        serde_json::from_str(text)
            .map_err(|e| Error::Report(format!("cannot parse metric report: {e}")))
    }
}
