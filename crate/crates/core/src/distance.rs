//! Record distances and exact nearest-neighbour kernels.
//!
//! Three public distance kinds (Euclidean, Hamming, Gower) plus
//! inverse-entropy column weighting. The nearest-neighbour kernels are exact
//! brute-force scans: worst-case work is one distance per (query, target)
//! pair, ties break to the smallest target index, and the per-query
//! reduction is a sequential minimum in target index order, so results are
//! bit-identical no matter how many threads the scan runs on.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{ColumnKind, MinMaxParams, Schema, Table, Value};
use crate::error::{Error, Result};

/// Distance family over full records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// `sqrt(sum_j w_j (a_j - b_j)^2)` over all-numeric schemas.
    Euclidean,
    /// `sum_j w_j 1[a_j != b_j]` over all-categorical schemas.
    Hamming,
    /// `(sum_j w_j d_j) / (sum_j w_j)` over mixed schemas, where `d_j` is
    /// `|a_j - b_j| / range_j` for numeric columns (ranges taken from a
    /// reference table, unclamped) and a mismatch indicator for categorical
    /// ones.
    Gower,
}

/// Where a weight vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProvenance {
    UserSupplied,
    InverseEntropy,
}

/// Per-column non-negative weights. At least one weight must be strictly
/// positive. `excluded` marks columns dropped by the inverse-entropy rule
/// (zero entropy ⇒ zero weight).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    provenance: WeightProvenance,
    excluded: Vec<bool>,
}

impl WeightVector {
    /// Validates a user-supplied weight vector.
    pub fn user(weights: Vec<f64>) -> Result<Self> {
        Self::validated(weights, WeightProvenance::UserSupplied, None)
    }

    fn validated(
        weights: Vec<f64>,
        provenance: WeightProvenance,
        excluded: Option<Vec<bool>>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("weight vector must not be empty".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Config(format!(
                    "weight {w} at column {i} must be a finite non-negative number"
                )));
            }
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Config("at least one weight must be strictly positive".into()));
        }
        let excluded = excluded.unwrap_or_else(|| vec![false; weights.len()]);
        debug_assert_eq!(excluded.len(), weights.len());
        Ok(WeightVector { weights, provenance, excluded })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> WeightProvenance {
        self.provenance
    }

    /// Flags for columns excluded by the inverse-entropy rule.
    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Restriction to a subset of columns.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let weights = indices.iter().map(|&i| self.weights[i]).collect();
        let excluded = indices.iter().map(|&i| self.excluded[i]).collect();
        Self::validated(weights, self.provenance, Some(excluded))
    }
}

/// Inverse-entropy weights: `w_j = 1 / H_j` where `H_j` is the Shannon
/// entropy (bits) of column j of `t`, numeric columns discretized into
/// `bins` equal-width bins. Zero-entropy columns get weight 0 and are
/// flagged excluded; if every column has zero entropy there is no usable
/// weighting and an error is returned.
pub fn inverse_entropy_weights(t: &Table, bins: usize) -> Result<WeightVector> {
    let mut weights = Vec::with_capacity(t.schema().len());
    let mut excluded = Vec::with_capacity(t.schema().len());
    for c in 0..t.schema().len() {
        let h = crate::dataset::column_entropy(t, c, bins)?;
        if h == 0.0 {
            weights.push(0.0);
            excluded.push(true);
        } else {
            weights.push(1.0 / h);
            excluded.push(false);
        }
    }
    if !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::Config(
            "every column has zero entropy; inverse-entropy weighting is undefined".into(),
        ));
    }
    WeightVector::validated(weights, WeightProvenance::InverseEntropy, Some(excluded))
}

/// How numeric cells are mapped before distances are computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "params")]
pub enum Normalization {
    /// Use raw numeric values.
    None,
    /// Map numeric cells through min-max parameters fitted on a designated
    /// reference table. For Gower the same parameters supply the range
    /// denominators.
    MinMaxOfReference(MinMaxParams),
}

/// A fully resolved distance configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    pub weights: Option<WeightVector>,
    pub normalization: Normalization,
}

impl DistanceSpec {
    /// Euclidean distance on raw numeric values, unit weights.
    pub fn euclidean() -> Self {
        DistanceSpec { kind: DistanceKind::Euclidean, weights: None, normalization: Normalization::None }
    }

    /// Hamming distance, unit weights.
    pub fn hamming() -> Self {
        DistanceSpec { kind: DistanceKind::Hamming, weights: None, normalization: Normalization::None }
    }

    /// Gower distance with numeric ranges taken from `reference`.
    pub fn gower(reference: &Table) -> Self {
        DistanceSpec {
            kind: DistanceKind::Gower,
            weights: None,
            normalization: Normalization::MinMaxOfReference(MinMaxParams::fit(reference)),
        }
    }

    pub fn with_weights(mut self, weights: WeightVector) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Restriction of this spec to a subset of columns (weights and
    /// normalization parameters follow the selection).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let weights = match &self.weights {
            Some(w) => Some(w.select(indices)?),
            None => None,
        };
        let normalization = match &self.normalization {
            Normalization::None => Normalization::None,
            Normalization::MinMaxOfReference(p) => {
                Normalization::MinMaxOfReference(p.select(indices))
            }
        };
        Ok(DistanceSpec { kind: self.kind, weights, normalization })
    }
}

/// One nearest neighbour: target row index plus the distance to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnEntry {
    pub index: usize,
    pub distance: f64,
}

/// Nearest-neighbour results, one entry per query record in query order.
#[derive(Debug, Clone, PartialEq)]
pub struct NnDistances {
    pub entries: Vec<NnEntry>,
}

impl NnDistances {
    /// The distances alone, in query order.
    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Compiled plans and encoded tables.
//
// Both `record_distance` and the NN kernels funnel through one shared
// per-pair routine over an encoded representation, so a scan is guaranteed
// to produce exactly the distances `record_distance` documents.
// ---------------------------------------------------------------------------

/// Numeric column slot in a compiled plan.
#[derive(Debug, Clone, Copy)]
struct NumCol {
    weight: f64,
    /// Offset into the encoded numeric block.
    off: usize,
    /// Gower range denominator (1.0 where unused).
    range: f64,
}

/// Categorical column slot in a compiled plan.
#[derive(Debug, Clone, Copy)]
struct CatCol {
    weight: f64,
    /// Offset into the encoded categorical block.
    off: usize,
}

#[derive(Debug, Clone, Copy)]
enum GowerCol {
    Num(NumCol),
    Cat(CatCol),
}

/// The arithmetic a compiled plan performs per record pair.
#[derive(Debug, Clone)]
enum Kernel {
    /// `sqrt(sum w_j d_j^2 + sum w_j mismatch_j)`: numeric columns first in
    /// schema order, then categorical columns in schema order. Euclidean is
    /// the all-numeric case; the mixed case serves identifiability scoring.
    RootSquared { num: Vec<NumCol>, cat: Vec<CatCol> },
    /// `sum w_j mismatch_j` in schema order.
    Mismatch { cat: Vec<CatCol> },
    /// `(sum w_j d_j) / (sum w_j)` in schema order.
    Ratio { cols: Vec<GowerCol>, denom: f64 },
}

/// A distance spec compiled against a schema: per-column weights, offsets
/// into the encoded blocks, and any normalization baked in.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    kernel: Kernel,
    /// Per numeric column (schema order): source column index and the affine
    /// map applied at encode time.
    encode_num: Vec<(usize, Option<(f64, f64)>)>,
    /// Per categorical column (schema order): source column index.
    encode_cat: Vec<usize>,
    column_names: Vec<String>,
}

impl Plan {
    /// Validates `spec` against `schema` and compiles it.
    pub(crate) fn compile(spec: &DistanceSpec, schema: &Schema) -> Result<Plan> {
        let n_cols = schema.len();
        let weights: Vec<f64> = match &spec.weights {
            Some(w) => {
                if w.len() != n_cols {
                    return Err(Error::SpecMismatch(format!(
                        "weight vector has {} entries, schema has {} columns",
                        w.len(),
                        n_cols
                    )));
                }
                w.weights().to_vec()
            }
            None => vec![1.0; n_cols],
        };

        let params = match &spec.normalization {
            Normalization::None => None,
            Normalization::MinMaxOfReference(p) => {
                if p.columns().len() != n_cols {
                    return Err(Error::SpecMismatch(format!(
                        "normalization parameters cover {} columns, schema has {}",
                        p.columns().len(),
                        n_cols
                    )));
                }
                Some(p)
            }
        };

        let mut encode_num = Vec::new();
        let mut encode_cat = Vec::new();
        let mut num_slots: Vec<(usize, f64, usize)> = Vec::new(); // (schema col, weight, off)
        let mut cat_slots: Vec<(usize, f64, usize)> = Vec::new();
        for c in 0..n_cols {
            match schema.column(c).kind {
                ColumnKind::Numeric => {
                    let off = encode_num.len();
                    num_slots.push((c, weights[c], off));
                    // Euclidean bakes min-max into the encoding; Gower keeps
                    // raw values and divides by the range per pair.
                    let affine = match (spec.kind, params) {
                        (DistanceKind::Euclidean, Some(p)) => p.column(c),
                        _ => None,
                    };
                    encode_num.push((c, affine));
                }
                ColumnKind::Categorical => {
                    let off = encode_cat.len();
                    cat_slots.push((c, weights[c], off));
                    encode_cat.push(c);
                }
            }
        }

        let kernel = match spec.kind {
            DistanceKind::Euclidean => {
                if let Some((c, _, _)) = cat_slots.first() {
                    return Err(Error::SpecMismatch(format!(
                        "euclidean distance requires an all-numeric schema; column {:?} is categorical",
                        schema.column(*c).name
                    )));
                }
                Kernel::RootSquared {
                    num: num_slots
                        .iter()
                        .map(|&(_, weight, off)| NumCol { weight, off, range: 1.0 })
                        .collect(),
                    cat: Vec::new(),
                }
            }
            DistanceKind::Hamming => {
                if let Some((c, _, _)) = num_slots.first() {
                    return Err(Error::SpecMismatch(format!(
                        "hamming distance requires an all-categorical schema; column {:?} is numeric",
                        schema.column(*c).name
                    )));
                }
                Kernel::Mismatch {
                    cat: cat_slots.iter().map(|&(_, weight, off)| CatCol { weight, off }).collect(),
                }
            }
            DistanceKind::Gower => {
                if !num_slots.is_empty() && params.is_none() {
                    return Err(Error::SpecMismatch(
                        "gower distance over numeric columns needs reference ranges \
                         (normalization: min-max of a reference table)"
                            .into(),
                    ));
                }
                let mut cols = Vec::with_capacity(n_cols);
                let mut num_iter = num_slots.iter().peekable();
                let mut cat_iter = cat_slots.iter().peekable();
                for c in 0..n_cols {
                    if num_iter.peek().map(|s| s.0) == Some(c) {
                        let &(col, weight, off) = num_iter.next().unwrap();
                        let (lo, hi) = params
                            .and_then(|p| p.column(col))
                            .expect("numeric column has fitted parameters");
                        cols.push(GowerCol::Num(NumCol { weight, off, range: hi - lo }));
                    } else if cat_iter.peek().map(|s| s.0) == Some(c) {
                        let &(_, weight, off) = cat_iter.next().unwrap();
                        cols.push(GowerCol::Cat(CatCol { weight, off }));
                    }
                }
                // Denominator accumulated in schema order, once.
                let mut denom = 0.0;
                for c in 0..n_cols {
                    denom += weights[c];
                }
                if denom <= 0.0 {
                    return Err(Error::SpecMismatch("gower weights sum to zero".into()));
                }
                Kernel::Ratio { cols, denom }
            }
        };

        Ok(Plan {
            kernel,
            encode_num,
            encode_cat,
            column_names: schema.columns().iter().map(|c| c.name.clone()).collect(),
        })
    }

    /// Weighted-Euclidean-plus-mismatch plan over a mixed schema:
    /// `sqrt(sum_num w_j (a_j - b_j)^2 + sum_cat w_j 1[a_j != b_j])` on raw
    /// values. Used by identifiability scoring.
    pub(crate) fn compile_mixed_root_squared(
        weights: &WeightVector,
        schema: &Schema,
    ) -> Result<Plan> {
        if weights.len() != schema.len() {
            return Err(Error::SpecMismatch(format!(
                "weight vector has {} entries, schema has {} columns",
                weights.len(),
                schema.len()
            )));
        }
        let mut encode_num = Vec::new();
        let mut encode_cat = Vec::new();
        let mut num = Vec::new();
        let mut cat = Vec::new();
        for c in 0..schema.len() {
            match schema.column(c).kind {
                ColumnKind::Numeric => {
                    num.push(NumCol { weight: weights.weights()[c], off: encode_num.len(), range: 1.0 });
                    encode_num.push((c, None));
                }
                ColumnKind::Categorical => {
                    cat.push(CatCol { weight: weights.weights()[c], off: encode_cat.len() });
                    encode_cat.push(c);
                }
            }
        }
        Ok(Plan {
            kernel: Kernel::RootSquared { num, cat },
            encode_num,
            encode_cat,
            column_names: schema.columns().iter().map(|c| c.name.clone()).collect(),
        })
    }

    fn num_width(&self) -> usize {
        self.encode_num.len()
    }

    fn cat_width(&self) -> usize {
        self.encode_cat.len()
    }
}

/// Tables encoded for the scan: numeric cells (normalization baked in where
/// the plan says so) and categorical cells interned to integer codes shared
/// across all tables encoded together.
pub(crate) struct Encoded {
    num: Vec<f64>,
    cat: Vec<u32>,
    rows: usize,
}

impl Encoded {
    #[inline]
    fn num_row(&self, plan: &Plan, r: usize) -> &[f64] {
        let w = plan.num_width();
        &self.num[r * w..(r + 1) * w]
    }

    #[inline]
    fn cat_row(&self, plan: &Plan, r: usize) -> &[u32] {
        let w = plan.cat_width();
        &self.cat[r * w..(r + 1) * w]
    }
}

/// Encodes row sets under one plan with one shared token table, rejecting
/// missing cells.
pub(crate) fn encode_all<'a>(
    plan: &Plan,
    row_sets: &[&'a [Vec<Value>]],
) -> Result<Vec<Encoded>> {
    let mut interner: std::collections::HashMap<&'a str, u32> = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(row_sets.len());
    for rows in row_sets {
        let mut num = Vec::with_capacity(rows.len() * plan.num_width());
        let mut cat = Vec::with_capacity(rows.len() * plan.cat_width());
        for (r, row) in rows.iter().enumerate() {
            for &(c, affine) in &plan.encode_num {
                match &row[c] {
                    Value::Num(v) => num.push(match affine {
                        Some((lo, hi)) => (v - lo) / (hi - lo),
                        None => *v,
                    }),
                    Value::Missing => {
                        return Err(Error::MissingValue { column: plan.column_names[c].clone(), row: r })
                    }
                    Value::Cat(_) => unreachable!("validated at table construction"),
                }
            }
            for &c in &plan.encode_cat {
                match &row[c] {
                    Value::Cat(s) => {
                        let next = interner.len() as u32;
                        let code = *interner.entry(s.as_str()).or_insert(next);
                        cat.push(code);
                    }
                    Value::Missing => {
                        return Err(Error::MissingValue { column: plan.column_names[c].clone(), row: r })
                    }
                    Value::Num(_) => unreachable!("validated at table construction"),
                }
            }
        }
        out.push(Encoded { num, cat, rows: rows.len() });
    }
    Ok(out)
}

/// The one per-pair routine every distance computation goes through.
#[inline]
fn pair_distance(kernel: &Kernel, a_num: &[f64], a_cat: &[u32], b_num: &[f64], b_cat: &[u32]) -> f64 {
    match kernel {
        Kernel::RootSquared { num, cat } => {
            let mut acc = 0.0;
            for col in num {
                let d = a_num[col.off] - b_num[col.off];
                acc += col.weight * (d * d);
            }
            for col in cat {
                if a_cat[col.off] != b_cat[col.off] {
                    acc += col.weight;
                }
            }
            acc.sqrt()
        }
        Kernel::Mismatch { cat } => {
            let mut acc = 0.0;
            for col in cat {
                if a_cat[col.off] != b_cat[col.off] {
                    acc += col.weight;
                }
            }
            acc
        }
        Kernel::Ratio { cols, denom } => {
            let mut acc = 0.0;
            for col in cols {
                match col {
                    GowerCol::Num(n) => {
                        let d = (a_num[n.off] - b_num[n.off]).abs() / n.range;
                        acc += n.weight * d;
                    }
                    GowerCol::Cat(c) => {
                        if a_cat[c.off] != b_cat[c.off] {
                            acc += c.weight;
                        }
                    }
                }
            }
            acc / denom
        }
    }
}

/// Distance between two records under a [`DistanceSpec`].
///
/// - Euclidean: `sqrt(sum_j w_j (a_j - b_j)^2)` over numeric cells, after
///   min-max normalization when `spec` carries reference parameters.
/// - Hamming: `sum_j w_j 1[a_j != b_j]` over categorical cells.
/// - Gower: `(sum_j w_j d_j) / (sum_j w_j)` in schema column order, with
///   `d_j = |a_j - b_j| / range_j` for numeric columns (range from the
///   reference parameters, not clamped) and `d_j = 1[a_j != b_j]` for
///   categorical ones.
///
/// Missing cells and mismatches between `spec` and `schema` are errors.
pub fn record_distance(a: &[Value], b: &[Value], spec: &DistanceSpec, schema: &Schema) -> Result<f64> {
    if a.len() != schema.len() || b.len() != schema.len() {
        return Err(Error::SpecMismatch(format!(
            "records have {} and {} cells, schema has {} columns",
            a.len(),
            b.len(),
            schema.len()
        )));
    }
    let plan = Plan::compile(spec, schema)?;
    let rows_a = vec![a.to_vec()];
    let rows_b = vec![b.to_vec()];
    let encoded = encode_all(&plan, &[&rows_a, &rows_b])?;
    Ok(pair_distance(
        &plan.kernel,
        encoded[0].num_row(&plan, 0),
        encoded[0].cat_row(&plan, 0),
        encoded[1].num_row(&plan, 0),
        encoded[1].cat_row(&plan, 0),
    ))
}

/// Scan strategy shared by [`nn_between`] and [`nn_within`].
pub(crate) fn nn_scan(
    plan: &Plan,
    queries: &Encoded,
    targets: &Encoded,
    skip_same_index: bool,
) -> Vec<NnEntry> {
    (0..queries.rows)
        .into_par_iter()
        .map(|i| {
            let q_num = queries.num_row(plan, i);
            let q_cat = queries.cat_row(plan, i);
            let mut best = NnEntry { index: usize::MAX, distance: f64::INFINITY };
            for j in 0..targets.rows {
                if skip_same_index && i == j {
                    continue;
                }
                let d = pair_distance(
                    &plan.kernel,
                    q_num,
                    q_cat,
                    targets.num_row(plan, j),
                    targets.cat_row(plan, j),
                );
                // Strict less-than keeps the smallest index on ties.
                if d < best.distance {
                    best = NnEntry { index: j, distance: d };
                }
            }
            best
        })
        .collect()
}

fn check_nn_inputs(queries: &Table, targets: &Table, context: &str) -> Result<()> {
    if queries.schema() != targets.schema() {
        return Err(Error::SpecMismatch(format!("{context}: query and target schemas differ")));
    }
    if targets.is_empty() {
        return Err(Error::EmptyInput(format!("{context}: target table has no rows")));
    }
    queries.reject_any_missing(context)?;
    targets.reject_any_missing(context)?;
    Ok(())
}

/// For each query record, its nearest neighbour among `targets` (exact
/// brute-force scan; ties go to the smallest target index). May run queries
/// in parallel; results are bit-identical at any thread count.
pub fn nn_between(queries: &Table, targets: &Table, spec: &DistanceSpec) -> Result<NnDistances> {
    check_nn_inputs(queries, targets, "nn_between")?;
    let plan = Plan::compile(spec, queries.schema())?;
    let q_rows: Vec<Vec<Value>> = queries.rows().map(|r| r.to_vec()).collect();
    let t_rows: Vec<Vec<Value>> = targets.rows().map(|r| r.to_vec()).collect();
    let encoded = encode_all(&plan, &[&q_rows, &t_rows])?;
    Ok(NnDistances { entries: nn_scan(&plan, &encoded[0], &encoded[1], false) })
}

/// For each record of `t`, its nearest *other* record of `t` (self-pairs
/// excluded; ties to the smallest index). Needs at least two rows.
pub fn nn_within(t: &Table, spec: &DistanceSpec) -> Result<NnDistances> {
    if t.len() < 2 {
        return Err(Error::EmptyInput("nn_within needs at least 2 rows".into()));
    }
    t.reject_any_missing("nn_within")?;
    let plan = Plan::compile(spec, t.schema())?;
    let rows: Vec<Vec<Value>> = t.rows().map(|r| r.to_vec()).collect();
    let encoded = encode_all(&plan, &[&rows])?;
    Ok(NnDistances { entries: nn_scan(&plan, &encoded[0], &encoded[0], true) })
}

/// Internal variant of [`nn_between`]/[`nn_within`] for pre-compiled plans;
/// lets other modules run scans under non-public kernels.
pub(crate) fn nn_with_plan(
    plan: &Plan,
    queries: &Table,
    targets: &Table,
    skip_same_index: bool,
) -> Result<NnDistances> {
    let q_rows: Vec<Vec<Value>> = queries.rows().map(|r| r.to_vec()).collect();
    let t_rows: Vec<Vec<Value>> = targets.rows().map(|r| r.to_vec()).collect();
    let encoded = encode_all(plan, &[&q_rows, &t_rows])?;
    Ok(NnDistances { entries: nn_scan(plan, &encoded[0], &encoded[1], skip_same_index) })
}

/// Full distance matrix, row-major `queries.len() × targets.len()`, for
/// callers that need more than the single nearest neighbour (e.g. k-nearest
/// votes). Same kernel and encoding as the nearest-neighbour scans.
pub(crate) fn all_distances_with_plan(
    plan: &Plan,
    queries: &Table,
    targets: &Table,
) -> Result<Vec<f64>> {
    let q_rows: Vec<Vec<Value>> = queries.rows().map(|r| r.to_vec()).collect();
    let t_rows: Vec<Vec<Value>> = targets.rows().map(|r| r.to_vec()).collect();
    let encoded = encode_all(plan, &[&q_rows, &t_rows])?;
    let (q, t) = (&encoded[0], &encoded[1]);
    let out = (0..q.rows)
        .into_par_iter()
        .flat_map_iter(|i| {
            let q_num = q.num_row(plan, i);
            let q_cat = q.cat_row(plan, i);
            (0..t.rows)
                .map(move |j| {
                    pair_distance(&plan.kernel, q_num, q_cat, t.num_row(plan, j), t.cat_row(plan, j))
                })
                .collect::<Vec<f64>>()
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnDef;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn schema_numeric(n: usize) -> Schema {
        Schema::new((0..n).map(|i| ColumnDef::new(format!("x{i}"), ColumnKind::Numeric)).collect())
            .unwrap()
    }

    fn schema_categorical(n: usize) -> Schema {
        Schema::new(
            (0..n).map(|i| ColumnDef::new(format!("c{i}"), ColumnKind::Categorical)).collect(),
        )
        .unwrap()
    }

    fn mixed_schema() -> Schema {
        Schema::new(vec![
            ColumnDef::new("x", ColumnKind::Numeric),
            ColumnDef::new("c", ColumnKind::Categorical),
        ])
        .unwrap()
    }

    fn nums(values: &[f64]) -> Vec<Value> {
        values.iter().map(|&v| Value::Num(v)).collect()
    }

    #[test]
    fn euclidean_three_four_five() {
        let schema = schema_numeric(2);
        let d = record_distance(&nums(&[0.0, 0.0]), &nums(&[3.0, 4.0]), &DistanceSpec::euclidean(), &schema)
            .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn euclidean_weights_scale_under_the_root() {
        let schema = schema_numeric(2);
        let w = WeightVector::user(vec![4.0, 0.25]).unwrap();
        let spec = DistanceSpec::euclidean().with_weights(w);
        let d = record_distance(&nums(&[0.0, 0.0]), &nums(&[1.0, 2.0]), &spec, &schema).unwrap();
        // sqrt(4*1 + 0.25*4) = sqrt(5)
        assert_abs_diff_eq!(d, 5.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn hamming_counts_weighted_mismatches() {
        let schema = schema_categorical(3);
        let a = vec![Value::Cat("a".into()), Value::Cat("b".into()), Value::Cat("c".into())];
        let b = vec![Value::Cat("a".into()), Value::Cat("x".into()), Value::Cat("y".into())];
        let d = record_distance(&a, &b, &DistanceSpec::hamming(), &schema).unwrap();
        assert_eq!(d, 2.0);

        let w = WeightVector::user(vec![10.0, 1.0, 0.5]).unwrap();
        let d = record_distance(&a, &b, &DistanceSpec::hamming().with_weights(w), &schema).unwrap();
        assert_eq!(d, 1.5);
    }

    #[test]
    fn gower_mixed_example() {
        // Numeric range 10, |a-b| = 5 -> 0.5; categorical mismatch -> 1;
        // unit weights -> (0.5 + 1) / 2 = 0.75.
        let schema = mixed_schema();
        let reference = Table::new(
            schema.clone(),
            vec![
                vec![Value::Num(0.0), Value::Cat("p".into())],
                vec![Value::Num(10.0), Value::Cat("q".into())],
            ],
        )
        .unwrap();
        let spec = DistanceSpec::gower(&reference);
        let a = vec![Value::Num(0.0), Value::Cat("p".into())];
        let b = vec![Value::Num(5.0), Value::Cat("q".into())];
        assert_eq!(record_distance(&a, &b, &spec, &schema).unwrap(), 0.75);
    }

    #[test]
    fn gower_range_is_unclamped_for_out_of_reference_values() {
        let schema = schema_numeric(1);
        let reference = Table::new(schema.clone(), vec![nums(&[0.0]), nums(&[10.0])]).unwrap();
        let spec = DistanceSpec::gower(&reference);
        let d = record_distance(&nums(&[0.0]), &nums(&[25.0]), &spec, &schema).unwrap();
        assert_eq!(d, 2.5);
    }

    #[test]
    fn identity_distance_is_zero_for_all_kinds() {
        let schema = mixed_schema();
        let reference = Table::new(
            schema.clone(),
            vec![
                vec![Value::Num(0.0), Value::Cat("p".into())],
                vec![Value::Num(1.0), Value::Cat("q".into())],
            ],
        )
        .unwrap();
        let a = vec![Value::Num(0.5), Value::Cat("p".into())];
        assert_eq!(record_distance(&a, &a, &DistanceSpec::gower(&reference), &schema).unwrap(), 0.0);

        let sn = schema_numeric(2);
        let r = nums(&[1.0, 2.0]);
        assert_eq!(record_distance(&r, &r, &DistanceSpec::euclidean(), &sn).unwrap(), 0.0);

        let sc = schema_categorical(2);
        let c = vec![Value::Cat("a".into()), Value::Cat("b".into())];
        assert_eq!(record_distance(&c, &c, &DistanceSpec::hamming(), &sc).unwrap(), 0.0);
    }

    #[test]
    fn kind_schema_mismatches_are_errors() {
        let schema = mixed_schema();
        let a = vec![Value::Num(0.0), Value::Cat("p".into())];
        assert!(matches!(
            record_distance(&a, &a, &DistanceSpec::euclidean(), &schema),
            Err(Error::SpecMismatch(_))
        ));
        assert!(matches!(
            record_distance(&a, &a, &DistanceSpec::hamming(), &schema),
            Err(Error::SpecMismatch(_))
        ));
        // Gower over numeric columns without reference ranges.
        let bare = DistanceSpec { kind: DistanceKind::Gower, weights: None, normalization: Normalization::None };
        assert!(matches!(record_distance(&a, &a, &bare, &schema), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn missing_cells_are_rejected() {
        let schema = schema_numeric(1);
        let a = vec![Value::Missing];
        let b = nums(&[1.0]);
        assert!(matches!(
            record_distance(&a, &b, &DistanceSpec::euclidean(), &schema),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::user(vec![]).is_err());
        assert!(WeightVector::user(vec![0.0, 0.0]).is_err());
        assert!(WeightVector::user(vec![-1.0, 1.0]).is_err());
        assert!(WeightVector::user(vec![f64::NAN]).is_err());
        assert!(WeightVector::user(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn inverse_entropy_weights_reciprocal_examples() {
        // Column with entropy 2 bits -> weight 0.5; balanced binary -> 1.0;
        // constant -> 0 and excluded.
        let schema = Schema::new(vec![
            ColumnDef::new("four", ColumnKind::Categorical),
            ColumnDef::new("two", ColumnKind::Categorical),
            ColumnDef::new("const", ColumnKind::Categorical),
        ])
        .unwrap();
        let tokens = [
            ("a", "x", "k"),
            ("b", "y", "k"),
            ("c", "x", "k"),
            ("d", "y", "k"),
        ];
        let rows = tokens
            .iter()
            .map(|(a, b, c)| {
                vec![Value::Cat(a.to_string()), Value::Cat(b.to_string()), Value::Cat(c.to_string())]
            })
            .collect();
        let t = Table::new(schema, rows).unwrap();
        let w = inverse_entropy_weights(&t, crate::dataset::DEFAULT_ENTROPY_BINS).unwrap();
        assert_abs_diff_eq!(w.weights()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weights()[1], 1.0, epsilon = 1e-12);
        assert_eq!(w.weights()[2], 0.0);
        assert_eq!(w.excluded(), &[false, false, true]);
        assert_eq!(w.provenance(), WeightProvenance::InverseEntropy);
    }

    #[test]
    fn inverse_entropy_all_constant_is_an_error() {
        let schema = schema_categorical(1);
        let rows = vec![vec![Value::Cat("k".into())], vec![Value::Cat("k".into())]];
        let t = Table::new(schema, rows).unwrap();
        assert!(inverse_entropy_weights(&t, 10).is_err());
    }

    #[test]
    fn nn_between_identical_tables_finds_zero_distances() {
        let schema = schema_numeric(1);
        let t = Table::new(schema, vec![nums(&[1.0]), nums(&[5.0]), nums(&[9.0])]).unwrap();
        let nn = nn_between(&t, &t, &DistanceSpec::euclidean()).unwrap();
        for (i, e) in nn.entries.iter().enumerate() {
            assert_eq!(e.distance, 0.0);
            assert_eq!(e.index, i, "zero-distance self matches win ties at the own index");
        }
    }

    #[test]
    fn nn_between_small_hand_case() {
        let schema = schema_numeric(1);
        let queries = Table::new(schema.clone(), vec![nums(&[4.0])]).unwrap();
        let targets = Table::new(schema, vec![nums(&[0.0]), nums(&[10.0]), nums(&[5.0])]).unwrap();
        let nn = nn_between(&queries, &targets, &DistanceSpec::euclidean()).unwrap();
        assert_eq!(nn.entries[0], NnEntry { index: 2, distance: 1.0 });
    }

    #[test]
    fn nn_tie_breaks_to_smallest_index() {
        let schema = schema_numeric(1);
        let queries = Table::new(schema.clone(), vec![nums(&[5.0])]).unwrap();
        let targets = Table::new(schema, vec![nums(&[0.0]), nums(&[10.0]), nums(&[0.0])]).unwrap();
        let nn = nn_between(&queries, &targets, &DistanceSpec::euclidean()).unwrap();
        assert_eq!(nn.entries[0].index, 0);
    }

    #[test]
    fn nn_within_hand_case_and_duplicates() {
        let schema = schema_numeric(1);
        let t = Table::new(schema.clone(), vec![nums(&[0.0]), nums(&[10.0]), nums(&[11.0])]).unwrap();
        let nn = nn_within(&t, &DistanceSpec::euclidean()).unwrap();
        assert_eq!(nn.distances(), vec![10.0, 1.0, 1.0]);
        assert_eq!(nn.entries[0].index, 1);

        let dup = Table::new(schema, vec![nums(&[3.0]), nums(&[3.0])]).unwrap();
        let nn = nn_within(&dup, &DistanceSpec::euclidean()).unwrap();
        assert_eq!(nn.distances(), vec![0.0, 0.0]);
        assert_eq!(nn.entries[0].index, 1);
        assert_eq!(nn.entries[1].index, 0);
    }

    #[test]
    fn nn_within_needs_two_rows() {
        let schema = schema_numeric(1);
        let t = Table::new(schema, vec![nums(&[0.0])]).unwrap();
        assert!(matches!(nn_within(&t, &DistanceSpec::euclidean()), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn nn_rejects_schema_mismatch_and_empty_targets() {
        let a = Table::new(schema_numeric(1), vec![nums(&[0.0])]).unwrap();
        let b = Table::new(schema_numeric(2), vec![nums(&[0.0, 1.0])]).unwrap();
        assert!(nn_between(&a, &b, &DistanceSpec::euclidean()).is_err());
        let empty = Table::new(schema_numeric(1), vec![]).unwrap();
        assert!(matches!(
            nn_between(&a, &empty, &DistanceSpec::euclidean()),
            Err(Error::EmptyInput(_))
        ));
    }

    // ---- property tests -------------------------------------------------

    /// Rows over one mixed schema: 2 numeric + 2 categorical columns.
    fn mixed_row() -> impl Strategy<Value = Vec<Value>> {
        (
            -50.0..50.0f64,
            -50.0..50.0f64,
            0u8..4,
            0u8..3,
        )
            .prop_map(|(x, y, c1, c2)| {
                vec![
                    Value::Num(x),
                    Value::Num(y),
                    Value::Cat(format!("a{c1}")),
                    Value::Cat(format!("b{c2}")),
                ]
            })
    }

    fn mixed4_schema() -> Schema {
        Schema::new(vec![
            ColumnDef::new("x", ColumnKind::Numeric),
            ColumnDef::new("y", ColumnKind::Numeric),
            ColumnDef::new("c1", ColumnKind::Categorical),
            ColumnDef::new("c2", ColumnKind::Categorical),
        ])
        .unwrap()
    }

    fn gower_spec_for(rows: &[Vec<Value>]) -> DistanceSpec {
        let t = Table::new(mixed4_schema(), rows.to_vec()).unwrap();
        DistanceSpec::gower(&t)
    }

    proptest! {
        #[test]
        fn distances_are_symmetric_and_zero_on_self(a in mixed_row(), b in mixed_row()) {
            let schema = mixed4_schema();
            let spec = gower_spec_for(&[a.clone(), b.clone()]);
            let ab = record_distance(&a, &b, &spec, &schema).unwrap();
            let ba = record_distance(&b, &a, &spec, &schema).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(record_distance(&a, &a, &spec, &schema).unwrap(), 0.0);
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn euclidean_triangle_inequality(
            a in proptest::collection::vec(-100.0..100.0f64, 3),
            b in proptest::collection::vec(-100.0..100.0f64, 3),
            c in proptest::collection::vec(-100.0..100.0f64, 3),
        ) {
            let schema = schema_numeric(3);
            let spec = DistanceSpec::euclidean();
            let ab = record_distance(&nums(&a), &nums(&b), &spec, &schema).unwrap();
            let bc = record_distance(&nums(&b), &nums(&c), &spec, &schema).unwrap();
            let ac = record_distance(&nums(&a), &nums(&c), &spec, &schema).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn hamming_triangle_inequality(
            a in proptest::collection::vec(0u8..3, 4),
            b in proptest::collection::vec(0u8..3, 4),
            c in proptest::collection::vec(0u8..3, 4),
        ) {
            let schema = schema_categorical(4);
            let cat = |v: &[u8]| -> Vec<Value> {
                v.iter().map(|t| Value::Cat(t.to_string())).collect()
            };
            let spec = DistanceSpec::hamming();
            let ab = record_distance(&cat(&a), &cat(&b), &spec, &schema).unwrap();
            let bc = record_distance(&cat(&b), &cat(&c), &spec, &schema).unwrap();
            let ac = record_distance(&cat(&a), &cat(&c), &spec, &schema).unwrap();
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn euclidean_scales_covariantly(
            a in proptest::collection::vec(-100.0..100.0f64, 3),
            b in proptest::collection::vec(-100.0..100.0f64, 3),
            c in 0.001..1000.0f64,
        ) {
            let schema = schema_numeric(3);
            let spec = DistanceSpec::euclidean();
            let d = record_distance(&nums(&a), &nums(&b), &spec, &schema).unwrap();
            let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
            let sb: Vec<f64> = b.iter().map(|v| v * c).collect();
            let ds = record_distance(&nums(&sa), &nums(&sb), &spec, &schema).unwrap();
            prop_assert!((ds - c * d).abs() <= 1e-9 * (1.0 + c * d));
        }

        #[test]
        fn gower_is_invariant_under_column_scaling(
            rows in proptest::collection::vec(mixed_row(), 2..12),
            c in 0.001..1000.0f64,
        ) {
            // Scaling a numeric column and its reference range together
            // leaves Gower unchanged (up to fp tolerance).
            let schema = mixed4_schema();
            let t = Table::new(schema.clone(), rows.clone()).unwrap();
            let spec = DistanceSpec::gower(&t);
            let scaled_rows: Vec<Vec<Value>> = rows
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    if let Value::Num(v) = r[0] {
                        r[0] = Value::Num(v * c);
                    }
                    r
                })
                .collect();
            let ts = Table::new(schema.clone(), scaled_rows.clone()).unwrap();
            let spec_s = DistanceSpec::gower(&ts);
            let d0 = record_distance(&rows[0], &rows[1], &spec, &schema).unwrap();
            let d1 = record_distance(&scaled_rows[0], &scaled_rows[1], &spec_s, &schema).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-9);
        }

        #[test]
        fn nn_matches_double_loop_oracle(
            q_rows in proptest::collection::vec(mixed_row(), 1..20),
            t_rows in proptest::collection::vec(mixed_row(), 1..20),
        ) {
            let schema = mixed4_schema();
            let queries = Table::new(schema.clone(), q_rows.clone()).unwrap();
            let targets = Table::new(schema.clone(), t_rows.clone()).unwrap();
            let spec = gower_spec_for(&t_rows);

            let got = nn_between(&queries, &targets, &spec).unwrap();
            for (i, q) in q_rows.iter().enumerate() {
                let mut best = (usize::MAX, f64::INFINITY);
                for (j, t) in t_rows.iter().enumerate() {
                    let d = record_distance(q, t, &spec, &schema).unwrap();
                    if d < best.1 {
                        best = (j, d);
                    }
                }
                prop_assert_eq!(got.entries[i].index, best.0);
                prop_assert_eq!(got.entries[i].distance.to_bits(), best.1.to_bits());
            }
        }
    }
}
