//! Tabular data model: schemas, typed tables, CSV loading, normalization,
//! column entropy and membership splits.
//!
//! Tables are immutable after construction. Cells are either finite numbers,
//! categorical tokens, or the missing marker; every operation that cannot
//! tolerate missing cells rejects them explicitly.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of equal-width bins used when discretizing a numeric
/// column for entropy computation.
pub const DEFAULT_ENTROPY_BINS: usize = 10;

/// Kind of a column: parses as finite reals, or holds categorical tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// One column of a schema. `quasi` marks quasi-identifiers, `sensitive`
/// marks disclosure targets; a column may be at most one of the two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub quasi: bool,
    #[serde(default)]
    pub sensitive: bool,
}

impl ColumnDef {
    /// Plain column with no identifier roles.
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnDef { name: name.into(), kind, quasi: false, sensitive: false }
    }
}

/// Ordered list of column definitions with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnDef>,
}

impl Schema {
    /// Validates and wraps column definitions: at least one column, unique
    /// names, and no column flagged both quasi-identifier and sensitive.
    pub fn new(columns: Vec<ColumnDef>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Schema("schema must have at least one column".into()));
        }
        let mut seen = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if let Some(prev) = seen.insert(c.name.clone(), i) {
                return Err(Error::Schema(format!(
                    "duplicate column name {:?} (positions {} and {})",
                    c.name, prev, i
                )));
            }
            if c.quasi && c.sensitive {
                return Err(Error::Schema(format!(
                    "column {:?} is flagged both quasi-identifier and sensitive",
                    c.name
                )));
            }
        }
        Ok(Schema { columns })
    }

    /// Loads a schema from its JSON sidecar file
    /// (`{"columns": [{"name", "kind", "quasi"?, "sensitive"?}, ...]}`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: Schema = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Schema::new(raw.columns)
    }

    pub fn columns(&self) -> &[ColumnDef] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, index: usize) -> &ColumnDef {
        &self.columns[index]
    }

    /// Index of a column by name.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Schema(format!("no column named {:?}", name)))
    }

    /// Indices of all quasi-identifier columns, in schema order.
    pub fn quasi_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.quasi)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of all sensitive columns, in schema order.
    pub fn sensitive_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.sensitive)
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-schema with the given columns (order as given, flags preserved).
    pub fn select(&self, indices: &[usize]) -> Result<Schema> {
        let mut cols = Vec::with_capacity(indices.len());
        for &i in indices {
            let col = self
                .columns
                .get(i)
                .ok_or_else(|| Error::Schema(format!("column index {i} out of range")))?;
            cols.push(col.clone());
        }
        Schema::new(cols)
    }
}

/// A single table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Finite real number.
    Num(f64),
    /// Categorical token (never the empty string; empty cells load as `Missing`).
    Cat(String),
    /// Missing-value marker.
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    /// The numeric payload, if this is a number.
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }
}

/// An immutable typed table: a schema plus rows of cells. Row order is
/// meaningful (records are identified positionally) and is preserved by
/// every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    rows: Vec<Vec<Value>>,
}

impl Table {
    /// Validates shape and cell kinds: every row has one cell per column,
    /// numbers are finite and sit in numeric columns, tokens in categorical
    /// ones. Missing markers are structurally legal anywhere; operations
    /// that cannot handle them reject them at call time.
    pub fn new(schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self> {
        let width = schema.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow { row: r, got: row.len(), expected: width });
            }
            for (c, cell) in row.iter().enumerate() {
                let col = schema.column(c);
                match (cell, col.kind) {
                    (Value::Num(v), ColumnKind::Numeric) => {
                        if !v.is_finite() {
                            return Err(Error::BadNumber {
                                column: col.name.clone(),
                                row: r,
                                cell: v.to_string(),
                            });
                        }
                    }
                    (Value::Cat(_), ColumnKind::Categorical) | (Value::Missing, _) => {}
                    (Value::Num(_), ColumnKind::Categorical) => {
                        return Err(Error::Schema(format!(
                            "numeric cell in categorical column {:?} (row {r})",
                            col.name
                        )))
                    }
                    (Value::Cat(_), ColumnKind::Numeric) => {
                        return Err(Error::Schema(format!(
                            "categorical cell in numeric column {:?} (row {r})",
                            col.name
                        )))
                    }
                }
            }
        }
        Ok(Table { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, index: usize) -> &[Value] {
        &self.rows[index]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// Cell at (row, column).
    pub fn cell(&self, row: usize, column: usize) -> &Value {
        &self.rows[row][column]
    }

    /// New table keeping only the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Table> {
        let schema = self.schema.select(indices)?;
        let rows = self
            .rows
            .iter()
            .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
            .collect();
        Table::new(schema, rows)
    }

    /// New table keeping only the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Table> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            let row = self
                .rows
                .get(i)
                .ok_or_else(|| Error::Config(format!("row index {i} out of range")))?;
            rows.push(row.clone());
        }
        Table::new(self.schema.clone(), rows)
    }

    /// Errors unless every cell of every listed column is non-missing.
    /// `context` names the operation for the error message.
    pub fn reject_missing(&self, columns: &[usize], context: &str) -> Result<()> {
        for &c in columns {
            for (r, row) in self.rows.iter().enumerate() {
                if row[c].is_missing() {
                    log::debug!("{context}: missing cell at row {r}, column {c}");
                    return Err(Error::MissingValue {
                        column: self.schema.column(c).name.clone(),
                        row: r,
                    });
                }
            }
        }
        Ok(())
    }

    /// Errors unless the whole table is free of missing cells.
    pub fn reject_any_missing(&self, context: &str) -> Result<()> {
        let all: Vec<usize> = (0..self.schema.len()).collect();
        self.reject_missing(&all, context)
    }
}

/// Loads a CSV file (comma-separated, double-quote quoting, header row
/// required) into a typed table.
///
/// With a `schema_hint`, header names must match the hint exactly (same
/// names, same order) and cells are parsed under the hinted kinds. Without
/// one, kinds are inferred: a column is `Numeric` iff every non-empty cell
/// parses as a finite real, else `Categorical`. Empty cells load as
/// `Value::Missing` in both modes.
pub fn load_csv(path: impl AsRef<Path>, schema_hint: Option<&Schema>) -> Result<Table> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow { row: r, got: record.len(), expected: headers.len() });
        }
        raw_rows.push(record.iter().map(|s| s.to_string()).collect());
    }

    let schema = match schema_hint {
        Some(hint) => {
            let hint_names: Vec<&str> = hint.columns().iter().map(|c| c.name.as_str()).collect();
            let got_names: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
            if hint_names != got_names {
                return Err(Error::Schema(format!(
                    "header {:?} does not match schema columns {:?} ({})",
                    got_names,
                    hint_names,
                    path.display()
                )));
            }
            hint.clone()
        }
        None => {
            let columns = headers
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    let numeric = raw_rows
                        .iter()
                        .map(|row| row[c].as_str())
                        .filter(|cell| !cell.is_empty())
                        .all(|cell| cell.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
                    let kind = if numeric { ColumnKind::Numeric } else { ColumnKind::Categorical };
                    ColumnDef::new(name.clone(), kind)
                })
                .collect();
            Schema::new(columns)?
        }
    };

    let mut rows = Vec::with_capacity(raw_rows.len());
    for (r, raw) in raw_rows.into_iter().enumerate() {
        let mut row = Vec::with_capacity(raw.len());
        for (c, cell) in raw.into_iter().enumerate() {
            let col = schema.column(c);
            let value = if cell.is_empty() {
                Value::Missing
            } else {
                match col.kind {
                    ColumnKind::Numeric => {
                        let v: f64 = cell.parse().map_err(|_| Error::BadNumber {
                            column: col.name.clone(),
                            row: r,
                            cell: cell.clone(),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::BadNumber { column: col.name.clone(), row: r, cell });
                        }
                        Value::Num(v)
                    }
                    ColumnKind::Categorical => Value::Cat(cell),
                }
            };
            row.push(value);
        }
        rows.push(row);
    }

    Table::new(schema, rows)
}

/// Writes a table as CSV (header row, empty field for missing cells).
/// Numbers use Rust's shortest round-trip rendering, so a write/load cycle
/// reproduces every cell exactly.
pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
    let header: Vec<&str> = table.schema().columns().iter().map(|c| c.name.as_str()).collect();
    writer
        .write_record(&header)
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
    for row in table.rows() {
        let record: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Value::Num(v) => v.to_string(),
                Value::Cat(s) => s.clone(),
                Value::Missing => String::new(),
            })
            .collect();
        writer
            .write_record(&record)
            .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads membership labels from a one-column CSV with header `member` and
/// cells in {0, 1}, aligned with a candidate table by row order.
pub fn load_labels_csv(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
    if headers.len() != 1 || headers.get(0) != Some("member") {
        return Err(Error::Config(format!(
            "label file {} must have exactly one column named \"member\"",
            path.display()
        )));
    }
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        match record.get(0) {
            Some("0") => labels.push(false),
            Some("1") => labels.push(true),
            other => {
                return Err(Error::Config(format!(
                    "label file {} row {r}: expected 0 or 1, got {:?}",
                    path.display(),
                    other.unwrap_or("")
                )))
            }
        }
    }
    Ok(labels)
}

/// Per-column affine parameters produced by [`normalize_minmax`]: `(lo, hi)`
/// for numeric columns, `None` for categorical ones. Applying them maps a
/// cell v to `(v - lo) / (hi - lo)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    params: Vec<Option<(f64, f64)>>,
}

impl MinMaxParams {
    /// Computes parameters from a reference table: per numeric column,
    /// `(min, max)` over non-missing cells, with `(min, min + 1)` recorded
    /// for constant columns so application maps them to 0. A numeric column
    /// with no observed values records `(0, 1)` (the identity map).
    pub fn fit(table: &Table) -> Self {
        let params = (0..table.schema().len())
            .map(|c| match table.schema().column(c).kind {
                ColumnKind::Categorical => None,
                ColumnKind::Numeric => {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    let mut seen = false;
                    for row in table.rows() {
                        if let Value::Num(v) = row[c] {
                            lo = lo.min(v);
                            hi = hi.max(v);
                            seen = true;
                        }
                    }
                    if !seen {
                        Some((0.0, 1.0))
                    } else if lo == hi {
                        Some((lo, lo + 1.0))
                    } else {
                        Some((lo, hi))
                    }
                }
            })
            .collect();
        MinMaxParams { params }
    }

    pub fn columns(&self) -> &[Option<(f64, f64)>] {
        &self.params
    }

    /// `(lo, hi)` for a numeric column index.
    pub fn column(&self, index: usize) -> Option<(f64, f64)> {
        self.params.get(index).copied().flatten()
    }

    /// Restriction to a subset of columns (for sub-schema distances).
    pub fn select(&self, indices: &[usize]) -> MinMaxParams {
        MinMaxParams { params: indices.iter().map(|&i| self.params[i]).collect() }
    }
}

/// Min-max normalizes every numeric column of `t` to [0, 1] and returns the
/// affine parameters so a second table can be mapped with the same ones via
/// [`apply_minmax`]. Constant columns map to all zeros. Missing cells pass
/// through unchanged.
pub fn normalize_minmax(t: &Table) -> Result<(Table, MinMaxParams)> {
    let params = MinMaxParams::fit(t);
    let normalized = apply_minmax(t, &params)?;
    Ok((normalized, params))
}

/// Maps every numeric cell of `t` through previously fitted parameters:
/// `v -> (v - lo) / (hi - lo)`. Values outside the fitted range map outside
/// [0, 1] (no clamping).
pub fn apply_minmax(t: &Table, params: &MinMaxParams) -> Result<Table> {
    if params.columns().len() != t.schema().len() {
        return Err(Error::Config(format!(
            "min-max parameters cover {} columns, table has {}",
            params.columns().len(),
            t.schema().len()
        )));
    }
    for (c, p) in params.columns().iter().enumerate() {
        let is_numeric = t.schema().column(c).kind == ColumnKind::Numeric;
        if is_numeric != p.is_some() {
            return Err(Error::Config(format!(
                "min-max parameters disagree with column kind at {:?}",
                t.schema().column(c).name
            )));
        }
    }
    let rows = t
        .rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, cell)| match (cell, params.column(c)) {
                    (Value::Num(v), Some((lo, hi))) => Value::Num((v - lo) / (hi - lo)),
                    _ => cell.clone(),
                })
                .collect()
        })
        .collect();
    Table::new(t.schema().clone(), rows)
}

/// Shannon entropy (bits) of one column. Categorical columns use token
/// frequencies; numeric columns are discretized into `bins` equal-width bins
/// over the observed [min, max] (a constant column occupies a single bin).
/// Missing cells are excluded; a column with no observed values is an error.
pub fn column_entropy(t: &Table, column: usize, bins: usize) -> Result<f64> {
    if column >= t.schema().len() {
        return Err(Error::Schema(format!("column index {column} out of range")));
    }
    if bins == 0 {
        return Err(Error::Config("entropy bin count must be at least 1".into()));
    }
    let mut counts: HashMap<u64, usize> = HashMap::new();
    let mut token_counts: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;

    match t.schema().column(column).kind {
        ColumnKind::Categorical => {
            for row in t.rows() {
                match &row[column] {
                    Value::Cat(s) => {
                        *token_counts.entry(s.as_str()).or_insert(0) += 1;
                        total += 1;
                    }
                    Value::Missing => {}
                    Value::Num(_) => unreachable!("validated at construction"),
                }
            }
        }
        ColumnKind::Numeric => {
            let values: Vec<f64> = t
                .rows()
                .filter_map(|row| row[column].as_num())
                .collect();
            if values.is_empty() {
                return Err(Error::EmptyInput(format!(
                    "column {:?} has no observed values",
                    t.schema().column(column).name
                )));
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for v in &values {
                let bin = if hi == lo {
                    0
                } else {
                    let idx = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
                    idx.min(bins - 1)
                };
                *counts.entry(bin as u64).or_insert(0) += 1;
                total += 1;
            }
        }
    }

    if total == 0 {
        return Err(Error::EmptyInput(format!(
            "column {:?} has no observed values",
            t.schema().column(column).name
        )));
    }

    let mut h = 0.0;
    let n = total as f64;
    let freqs = counts.values().chain(token_counts.values());
    for &count in freqs {
        let p = count as f64 / n;
        h -= p * p.log2();
    }
    // -0.0 can fall out of the sum for single-category columns.
    Ok(if h == 0.0 { 0.0 } else { h })
}

/// Splits a table into (members, non-members) for attack evaluation.
/// `round(member_fraction * n)` rows, clamped to [1, n-1], are drawn without
/// replacement using a ChaCha8 stream seeded by `seed`; both halves keep
/// their original relative row order. The same seed always yields the same
/// split.
pub fn split_membership(t: &Table, member_fraction: f64, seed: u64) -> Result<(Table, Table)> {
    let n = t.len();
    if n < 2 {
        return Err(Error::EmptyInput("membership split needs at least 2 rows".into()));
    }
    if !(member_fraction > 0.0 && member_fraction < 1.0) {
        return Err(Error::Config(format!(
            "member_fraction must lie strictly between 0 and 1, got {member_fraction}"
        )));
    }
    let k = (member_fraction * n as f64).round() as usize;
    let k = k.clamp(1, n - 1);

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let mut members: Vec<usize> = indices[..k].to_vec();
    let mut non_members: Vec<usize> = indices[k..].to_vec();
    members.sort_unstable();
    non_members.sort_unstable();

    Ok((t.select_rows(&members)?, t.select_rows(&non_members)?))
}

/// Generates a uniform random table for benchmarks and stress tests:
/// `numeric_cols` columns named `x0, x1, …` holding uniform draws from
/// `[0, 1)` and `categorical_cols` columns named `c0, c1, …` holding tokens
/// `t0…t7`. The same seed always yields the same table.
pub fn random_mixed_table(
    rows: usize,
    numeric_cols: usize,
    categorical_cols: usize,
    seed: u64,
) -> Result<Table> {
    use rand::Rng;
    if numeric_cols + categorical_cols == 0 {
        return Err(Error::EmptyInput("a table needs at least one column".into()));
    }
    let mut columns = Vec::with_capacity(numeric_cols + categorical_cols);
    for i in 0..numeric_cols {
        columns.push(ColumnDef::new(format!("x{i}"), ColumnKind::Numeric));
    }
    for i in 0..categorical_cols {
        columns.push(ColumnDef::new(format!("c{i}"), ColumnKind::Categorical));
    }
    let schema = Schema::new(columns)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..rows)
        .map(|_| {
            let mut row = Vec::with_capacity(numeric_cols + categorical_cols);
            for _ in 0..numeric_cols {
                row.push(Value::Num(rng.gen::<f64>()));
            }
            for _ in 0..categorical_cols {
                row.push(Value::Cat(format!("t{}", rng.gen_range(0..8))));
            }
            row
        })
        .collect();
    Table::new(schema, rows)
}
