//! Simulated privacy attacks: distance-threshold membership inference,
//! attribute disclosure via nearest-neighbour voting, and the density-ratio
//! membership attack with its Gaussian kernel density estimator.

use std::collections::HashMap;

use serde::Serialize;

use crate::dataset::{ColumnKind, MinMaxParams, Schema, Table, Value};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::report::{canonical_json, sha256_hex};
use crate::similarity::median;

/// Binary attack outcome: confusion counts plus derived rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    /// `tp / (tp + fp)`; `None` when the attack predicted no members.
    pub precision: Option<f64>,
    /// `tp / (tp + fn)`.
    pub recall: f64,
    /// `(tp + tn) / candidates`.
    pub accuracy: f64,
    /// Area under the ROC curve of the attack scores, when the attack
    /// produces continuous scores.
    pub auroc: Option<f64>,
    /// The resolved decision threshold the counts were taken at.
    pub threshold: f64,
    /// Digest of the exact configuration that produced this report.
    pub config_digest: String,
}

impl AttackReport {
    fn from_predictions(
        predictions: &[bool],
        labels: &[bool],
        threshold: f64,
        auroc: Option<f64>,
        config_digest: String,
    ) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_count) = (0usize, 0usize, 0usize, 0usize);
        for (&pred, &truth) in predictions.iter().zip(labels) {
            match (pred, truth) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_count += 1,
            }
        }
        let precision = if tp + fp > 0 { Some(tp as f64 / (tp + fp) as f64) } else { None };
        let recall = tp as f64 / (tp + fn_count) as f64;
        let accuracy = (tp + tn) as f64 / predictions.len() as f64;
        AttackReport { tp, fp, tn, fn_count, precision, recall, accuracy, auroc, threshold, config_digest }
    }
}

/// How the membership-inference distance threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum TauRule {
    /// A fixed non-negative distance.
    Fixed(f64),
    /// The median nearest-neighbour distance within the synthetic table
    /// (needs at least two synthetic rows).
    MedianSynthNn,
}

/// Threshold membership-inference configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiaConfig {
    pub distance: DistanceSpec,
    pub tau: TauRule,
}

/// Distance-threshold membership inference: a candidate is predicted to be
/// a training member iff its distance to the closest synthetic record is at
/// most τ. Labels mark true members; at least one true member is required
/// for recall to be defined.
pub fn threshold_mia(
    synth: &Table,
    candidates: &Table,
    labels: &[bool],
    cfg: &MiaConfig,
) -> Result<AttackReport> {
    if labels.len() != candidates.len() {
        return Err(Error::Config(format!(
            "{} labels for {} candidate rows",
            labels.len(),
            candidates.len()
        )));
    }
    if !labels.iter().any(|&m| m) {
        return Err(Error::DegenerateLabels(
            "membership inference needs at least one true member".into(),
        ));
    }
    let tau = match cfg.tau {
        TauRule::Fixed(v) => {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("fixed τ must be finite and non-negative, got {v}")));
            }
            v
        }
        TauRule::MedianSynthNn => {
            if synth.len() < 2 {
                return Err(Error::EmptyInput(
                    "median-of-synthetic-nn τ rule needs at least 2 synthetic rows".into(),
                ));
            }
            median(&crate::distance::nn_within(synth, &cfg.distance)?.distances())
        }
    };

    let distances = crate::distance::nn_between(candidates, synth, &cfg.distance)?.distances();
    let predictions: Vec<bool> = distances.iter().map(|&d| d <= tau).collect();
    let digest = sha256_hex(&canonical_json(&serde_json::to_value(cfg).expect("config serializes")));
    Ok(AttackReport::from_predictions(&predictions, labels, tau, None, digest))
}

// ---------------------------------------------------------------------------
// Attribute disclosure
// ---------------------------------------------------------------------------

/// Attribute-disclosure attack configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttrDisclosureConfig {
    /// Number of synthetic neighbours that vote on the sensitive value.
    pub k: usize,
    /// Adversary knowledge levels: per level, the column names the adversary
    /// knows. Each level must be non-empty and exclude the sensitive column.
    pub levels: Vec<Vec<String>>,
    /// Distance over the full schema; restricted to each level's columns.
    pub distance: DistanceSpec,
}

/// One-vs-rest outcome for a single sensitive class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassOutcome {
    pub class: String,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    /// Number of scored targets whose true class this is.
    pub support: usize,
}

/// Attack outcome at one knowledge level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelOutcome {
    /// The columns the adversary knew.
    pub columns: Vec<String>,
    /// Macro-averaged precision over the classes present in the targets
    /// (classes never predicted contribute 0).
    pub precision: f64,
    /// Macro-averaged recall over the same classes.
    pub recall: f64,
    /// Number of targets with a known true sensitive value.
    pub scored: usize,
    pub per_class: Vec<ClassOutcome>,
}

/// Attribute-disclosure result: one outcome per knowledge level plus the
/// unweighted means across levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttrDisclosureReport {
    pub levels: Vec<LevelOutcome>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub k: usize,
    pub config_digest: String,
}

/// Canonical class label for a sensitive cell.
fn class_label(v: &Value) -> Option<String> {
    match v {
        Value::Cat(s) => Some(s.clone()),
        Value::Num(n) => Some(n.to_string()),
        Value::Missing => None,
    }
}

/// Attribute disclosure: for each target record, an adversary who knows the
/// target's values on a knowledge level finds the k nearest synthetic
/// records on those columns and predicts the sensitive value by majority
/// vote (ties go to the class of the nearest tied-class neighbour).
/// Predictions are scored against the targets' true sensitive values with
/// macro-averaged precision and recall; targets with a missing sensitive
/// cell are predicted but not scored.
pub fn attribute_disclosure(
    synth: &Table,
    targets: &Table,
    sensitive: &str,
    cfg: &AttrDisclosureConfig,
) -> Result<AttrDisclosureReport> {
    if synth.is_empty() || targets.is_empty() {
        return Err(Error::EmptyInput("attribute disclosure needs non-empty tables".into()));
    }
    if synth.schema() != targets.schema() {
        return Err(Error::SpecMismatch("synthetic and target schemas differ".into()));
    }
    if cfg.k == 0 || cfg.k > synth.len() {
        return Err(Error::Config(format!(
            "k = {} must lie in 1..={} (the synthetic row count)",
            cfg.k,
            synth.len()
        )));
    }
    if cfg.levels.is_empty() {
        return Err(Error::Config("at least one knowledge level is required".into()));
    }
    let schema = synth.schema();
    let sensitive_idx = schema.index_of(sensitive)?;
    synth.reject_any_missing("attribute_disclosure synthetic table")?;

    // True labels; None marks unknown cells that are predicted but unscored.
    let truths: Vec<Option<String>> =
        targets.rows().map(|row| class_label(&row[sensitive_idx])).collect();
    let scored: usize = truths.iter().flatten().count();
    if scored == 0 {
        return Err(Error::EmptyInput(
            "every target has a missing sensitive value; nothing to score".into(),
        ));
    }

    // The macro average runs over the classes that actually occur.
    let mut classes: Vec<String> = truths.iter().flatten().cloned().collect();
    classes.sort();
    classes.dedup();

    let synth_labels: Vec<String> = synth
        .rows()
        .map(|row| class_label(&row[sensitive_idx]).expect("synthetic table has no missing cells"))
        .collect();

    let mut level_outcomes = Vec::with_capacity(cfg.levels.len());
    for level in &cfg.levels {
        let indices = resolve_level(schema, level, sensitive_idx)?;
        let level_synth = synth.select_columns(&indices)?;
        let level_targets = targets.select_columns(&indices)?;
        level_targets.reject_any_missing("attribute_disclosure adversary knowledge")?;
        let level_spec = cfg.distance.select(&indices)?;
        let plan = crate::distance::Plan::compile(&level_spec, level_synth.schema())?;

        let predictions =
            knn_vote(&plan, &level_targets, &level_synth, &synth_labels, cfg.k)?;

        level_outcomes.push(score_level(level, &predictions, &truths, &classes));
    }

    let mean_precision =
        level_outcomes.iter().map(|l| l.precision).sum::<f64>() / level_outcomes.len() as f64;
    let mean_recall =
        level_outcomes.iter().map(|l| l.recall).sum::<f64>() / level_outcomes.len() as f64;
    let digest = sha256_hex(&canonical_json(&serde_json::to_value(cfg).expect("config serializes")));
    Ok(AttrDisclosureReport {
        levels: level_outcomes,
        mean_precision,
        mean_recall,
        k: cfg.k,
        config_digest: digest,
    })
}

fn resolve_level(schema: &Schema, level: &[String], sensitive_idx: usize) -> Result<Vec<usize>> {
    if level.is_empty() {
        return Err(Error::Config("knowledge levels must not be empty".into()));
    }
    let mut indices = Vec::with_capacity(level.len());
    for name in level {
        let idx = schema.index_of(name)?;
        if idx == sensitive_idx {
            return Err(Error::Config(format!(
                "knowledge level contains the sensitive column {:?}",
                name
            )));
        }
        if indices.contains(&idx) {
            return Err(Error::Config(format!("knowledge level repeats column {:?}", name)));
        }
        indices.push(idx);
    }
    Ok(indices)
}

/// k-nearest-neighbour majority vote. Neighbours order by (distance, index);
/// vote ties resolve to the class of the first neighbour, in that order,
/// belonging to a maximal class.
fn knn_vote(
    plan: &crate::distance::Plan,
    targets: &Table,
    synth: &Table,
    synth_labels: &[String],
    k: usize,
) -> Result<Vec<String>> {
    let all = crate::distance::all_distances_with_plan(plan, targets, synth)?;
    let m = synth.len();
    let mut predictions = Vec::with_capacity(targets.len());
    for row in all.chunks(m) {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            row[a].partial_cmp(&row[b]).expect("distances are finite").then(a.cmp(&b))
        });
        let neighbours = &order[..k];

        let mut votes: HashMap<&str, usize> = HashMap::new();
        for &j in neighbours {
            *votes.entry(synth_labels[j].as_str()).or_insert(0) += 1;
        }
        let best = votes.values().copied().max().expect("k >= 1");
        let winner = neighbours
            .iter()
            .map(|&j| synth_labels[j].as_str())
            .find(|label| votes[label] == best)
            .expect("some neighbour holds the winning class");
        predictions.push(winner.to_string());
    }
    Ok(predictions)
}

fn score_level(
    level: &[String],
    predictions: &[String],
    truths: &[Option<String>],
    classes: &[String],
) -> LevelOutcome {
    let scored_pairs: Vec<(&String, &String)> = predictions
        .iter()
        .zip(truths)
        .filter_map(|(pred, truth)| truth.as_ref().map(|t| (pred, t)))
        .collect();
    let scored = scored_pairs.len();

    let mut per_class = Vec::with_capacity(classes.len());
    let (mut precision_sum, mut recall_sum) = (0.0, 0.0);
    for class in classes {
        let (mut tp, mut fp, mut tn, mut fn_count) = (0usize, 0usize, 0usize, 0usize);
        for &(pred, truth) in &scored_pairs {
            match (pred == class, truth == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_count += 1,
                (false, false) => tn += 1,
            }
        }
        let support = tp + fn_count;
        precision_sum += if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        recall_sum += tp as f64 / support as f64;
        per_class.push(ClassOutcome { class: class.clone(), tp, fp, tn, fn_count, support });
    }

    LevelOutcome {
        columns: level.to_vec(),
        precision: precision_sum / classes.len() as f64,
        recall: recall_sum / classes.len() as f64,
        scored,
        per_class,
    }
}

// ---------------------------------------------------------------------------
// Kernel density estimation and the density-ratio membership attack
// ---------------------------------------------------------------------------

/// Per-dimension bandwidth selection for the Gaussian KDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum BandwidthRule {
    /// `h_j = max(σ_j, 1e-6) · (4 / ((D + 2) n))^(1 / (D + 4))` where σ_j is
    /// the per-dimension sample standard deviation, D the encoded dimension
    /// count and n the fitted row count.
    Silverman,
    /// One fixed bandwidth for every dimension.
    Fixed(f64),
}

/// Scale applied to one-hot indicator coordinates so that a category
/// mismatch contributes one unit of squared distance.
const ONE_HOT_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// How a table maps into the KDE's numeric space: numeric columns pass
/// through, categorical columns one-hot encode over the categories seen in
/// the fitted table (unseen tokens map to all zeros).
#[derive(Debug, Clone, PartialEq)]
struct Encoding {
    schema: Schema,
    /// Per categorical column: (column index, sorted categories).
    categories: Vec<(usize, Vec<String>)>,
    /// Encoded dimensionality.
    dims: usize,
}

impl Encoding {
    fn fit(t: &Table) -> Encoding {
        let mut categories = Vec::new();
        let mut dims = 0;
        for c in 0..t.schema().len() {
            match t.schema().column(c).kind {
                ColumnKind::Numeric => dims += 1,
                ColumnKind::Categorical => {
                    let mut seen: Vec<String> = t
                        .rows()
                        .filter_map(|row| match &row[c] {
                            Value::Cat(s) => Some(s.clone()),
                            _ => None,
                        })
                        .collect();
                    seen.sort();
                    seen.dedup();
                    dims += seen.len();
                    categories.push((c, seen));
                }
            }
        }
        Encoding { schema: t.schema().clone(), categories, dims }
    }

    fn encode_row(&self, row: &[Value], out: &mut Vec<f64>) -> Result<()> {
        let mut cat_iter = self.categories.iter().peekable();
        for c in 0..self.schema.len() {
            match self.schema.column(c).kind {
                ColumnKind::Numeric => match &row[c] {
                    Value::Num(v) => out.push(*v),
                    _ => {
                        return Err(Error::MissingValue {
                            column: self.schema.column(c).name.clone(),
                            row: 0,
                        })
                    }
                },
                ColumnKind::Categorical => {
                    let (_, cats) = cat_iter.next().expect("one entry per categorical column");
                    let token = match &row[c] {
                        Value::Cat(s) => s.as_str(),
                        _ => {
                            return Err(Error::MissingValue {
                                column: self.schema.column(c).name.clone(),
                                row: 0,
                            })
                        }
                    };
                    let hit = cats.binary_search_by(|probe| probe.as_str().cmp(token)).ok();
                    for (i, _) in cats.iter().enumerate() {
                        out.push(if hit == Some(i) { ONE_HOT_SCALE } else { 0.0 });
                    }
                }
            }
        }
        debug_assert!(cat_iter.next().is_none());
        Ok(())
    }
}

/// A fitted product-Gaussian kernel density model.
#[derive(Debug, Clone)]
pub struct DensityModel {
    encoding: Encoding,
    /// Fitted points, row-major `n × dims`.
    points: Vec<f64>,
    n: usize,
    bandwidths: Vec<f64>,
    /// `-ln(n) - Σ_j ln(h_j √(2π))`, the constant part of every log-density.
    log_norm: f64,
}

impl DensityModel {
    /// Per-dimension bandwidths actually in use.
    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    /// Encoded dimensionality.
    pub fn dims(&self) -> usize {
        self.encoding.dims
    }

    /// Log-density of a record under the fitted model. Finite for every
    /// finite record.
    pub fn log_density(&self, record: &[Value]) -> Result<f64> {
        if record.len() != self.encoding.schema.len() {
            return Err(Error::SpecMismatch(format!(
                "record has {} cells, model expects {}",
                record.len(),
                self.encoding.schema.len()
            )));
        }
        let mut x = Vec::with_capacity(self.encoding.dims);
        self.encoding.encode_row(record, &mut x)?;
        Ok(self.log_density_encoded(&x))
    }

    fn log_density_encoded(&self, x: &[f64]) -> f64 {
        let d = self.encoding.dims;
        // logsumexp over per-point exponents  -0.5 Σ_j ((x_j - X_ij)/h_j)^2.
        let mut exponents = Vec::with_capacity(self.n);
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.n {
            let point = &self.points[i * d..(i + 1) * d];
            let mut s = 0.0;
            for j in 0..d {
                let z = (x[j] - point[j]) / self.bandwidths[j];
                s += z * z;
            }
            let e = -0.5 * s;
            if e > max {
                max = e;
            }
            exponents.push(e);
        }
        let sum: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
        self.log_norm + max + sum.ln()
    }
}

fn fit_with_encoding(t: &Table, encoding: Encoding, rule: BandwidthRule) -> Result<DensityModel> {
    if t.is_empty() {
        return Err(Error::EmptyInput("density estimation needs at least one row".into()));
    }
    t.reject_any_missing("kde_fit")?;
    let n = t.len();
    let d = encoding.dims;
    let mut points = Vec::with_capacity(n * d);
    for row in t.rows() {
        encoding.encode_row(row, &mut points)?;
    }

    let bandwidths: Vec<f64> = match rule {
        BandwidthRule::Fixed(h) => {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::Config(format!("fixed bandwidth must be positive, got {h}")));
            }
            vec![h; d]
        }
        BandwidthRule::Silverman => {
            let factor = (4.0 / ((d as f64 + 2.0) * n as f64)).powf(1.0 / (d as f64 + 4.0));
            (0..d)
                .map(|j| {
                    let mean = (0..n).map(|i| points[i * d + j]).sum::<f64>() / n as f64;
                    let sigma = if n < 2 {
                        0.0
                    } else {
                        let ss = (0..n).map(|i| {
                            let dv = points[i * d + j] - mean;
                            dv * dv
                        });
                        (ss.sum::<f64>() / (n as f64 - 1.0)).sqrt()
                    };
                    sigma.max(1e-6) * factor
                })
                .collect()
        }
    };

    let log_norm = -(n as f64).ln()
        - bandwidths.iter().map(|h| (h * (2.0 * std::f64::consts::PI).sqrt()).ln()).sum::<f64>();
    Ok(DensityModel { encoding, points, n, bandwidths, log_norm })
}

/// Fits a product-Gaussian KDE to a table. Numeric columns enter as-is;
/// categorical columns one-hot encode with indicator coordinates scaled by
/// 1/√2 so a category flip costs one unit of squared distance.
pub fn kde_fit(t: &Table, rule: BandwidthRule) -> Result<DensityModel> {
    let encoding = Encoding::fit(t);
    fit_with_encoding(t, encoding, rule)
}

/// Density-ratio membership inference. Each candidate is scored by
/// `log p_synth(x) - log p_reference(x)`, both densities fitted with the
/// same one-hot encoding and min-max normalization derived from the
/// reference table. Reports AUROC of the scores against the labels and the
/// confusion counts at the median-score threshold (member iff score is
/// strictly above the median).
pub fn domias(
    synth: &Table,
    reference: &Table,
    candidates: &Table,
    labels: &[bool],
    rule: BandwidthRule,
) -> Result<AttackReport> {
    if labels.len() != candidates.len() {
        return Err(Error::Config(format!(
            "{} labels for {} candidate rows",
            labels.len(),
            candidates.len()
        )));
    }
    if synth.schema() != reference.schema() || synth.schema() != candidates.schema() {
        return Err(Error::SpecMismatch(
            "synthetic, reference and candidate schemas must match".into(),
        ));
    }
    if synth.is_empty() || reference.is_empty() || candidates.is_empty() {
        return Err(Error::EmptyInput("density-ratio attack needs non-empty tables".into()));
    }
    if !labels.iter().any(|&m| m) || labels.iter().all(|&m| m) {
        return Err(Error::DegenerateLabels(
            "AUROC is undefined unless both members and non-members are present".into(),
        ));
    }
    candidates.reject_any_missing("domias candidates")?;

    let params = MinMaxParams::fit(reference);
    let reference_n = crate::dataset::apply_minmax(reference, &params)?;
    let synth_n = crate::dataset::apply_minmax(synth, &params)?;
    let candidates_n = crate::dataset::apply_minmax(candidates, &params)?;

    let encoding = Encoding::fit(&reference_n);
    let p_synth = fit_with_encoding(&synth_n, encoding.clone(), rule)?;
    let p_reference = fit_with_encoding(&reference_n, encoding, rule)?;

    let scores: Vec<f64> = candidates_n
        .rows()
        .map(|row| Ok(p_synth.log_density(row)? - p_reference.log_density(row)?))
        .collect::<Result<_>>()?;

    let area = auroc(&scores, labels)?;
    let threshold = median(&scores);
    let predictions: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
    let config = serde_json::json!({ "attack": "density_ratio", "bandwidth": rule });
    let digest = sha256_hex(&canonical_json(&config));
    Ok(AttackReport::from_predictions(&predictions, labels, threshold, Some(area), digest))
}

/// Area under the ROC curve by the rank formulation: the probability that a
/// uniformly random positive scores above a uniformly random negative, with
/// ties counting half. Needs finite scores and both classes present.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Config(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Config(format!("scores must be finite, got {bad}")));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels(
            "AUROC needs at least one positive and one negative".into(),
        ));
    }

    // Average ranks with ties shared, then the rank-sum identity.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("scores are finite"));
    let mut rank_of = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; tied scores share the mean rank of their run.
        let shared = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank_of[idx] = shared;
        }
        i = j + 1;
    }
    let positive_rank_sum: f64 =
        labels.iter().zip(&rank_of).filter(|(l, _)| **l).map(|(_, r)| r).sum();
    let p = positives as f64;
    let n = negatives as f64;
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
