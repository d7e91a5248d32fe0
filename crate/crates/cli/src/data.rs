//! CSV input: comma-separated, header row, UTF-8, `.` as decimal mark.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

/// A numeric table read from disk together with the digest of its bytes.
pub struct Table {
    pub columns: Vec<String>,
    /// Row-major cells, `rows x columns`.
    pub values: Array2<f64>,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let sha256 = sha256_hex(&bytes);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    let columns: Vec<String> = reader
        .headers()
        .with_context(|| format!("{}: cannot parse header row", path.display()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if columns.is_empty() || columns.iter().all(|c| c.is_empty()) {
        bail!("{}: header row is empty", path.display());
    }
    let mut seen = HashSet::new();
    for name in &columns {
        if name.is_empty() {
            bail!("{}: header contains an empty column name", path.display());
        }
        if !seen.insert(name) {
            bail!("{}: duplicate column name '{name}'", path.display());
        }
    }

    let mut cells = Vec::new();
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        // Line 1 is the header.
        let line = k + 2;
        let record = record.with_context(|| format!("{}: line {line}: malformed CSV record", path.display()))?;
        if record.len() != columns.len() {
            bail!("{}: line {line}: expected {} fields, found {}", path.display(), columns.len(), record.len());
        }
        for (field, name) in record.iter().zip(&columns) {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("{}: line {line}, column '{name}': '{field}' is not a number", path.display()))?;
            if !value.is_finite() {
                bail!("{}: line {line}, column '{name}': value is not finite", path.display());
            }
            cells.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("{}: no data rows", path.display());
    }
    let values = Array2::from_shape_vec((rows, columns.len()), cells).expect("row lengths checked");
    Ok(Table { columns, values, sha256 })
}

/// Training data: features, response and their provenance.
pub struct Training {
    pub feature_names: Vec<String>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub sha256: String,
}

pub fn read_training(path: &Path, response: &str) -> Result<Training> {
    let table = read_table(path)?;
    let Some(target) = table.columns.iter().position(|c| c == response) else {
        bail!("{}: response column '{response}' not found (columns: {})", path.display(), table.columns.join(", "));
    };
    let feature_idx: Vec<usize> = (0..table.columns.len()).filter(|&j| j != target).collect();
    if feature_idx.is_empty() {
        bail!("{}: no feature columns besides the response '{response}'", path.display());
    }
    Ok(Training {
        feature_names: feature_idx.iter().map(|&j| table.columns[j].clone()).collect(),
        x: table.values.select(ndarray::Axis(1), &feature_idx),
        y: table.values.column(target).to_owned(),
        sha256: table.sha256,
    })
}

/// Feature matrix with columns reordered to `names`. The response column is
/// ignored when present; any other mismatch is an error listing the
/// offending columns.
pub fn read_features(path: &Path, names: &[String], response: &str) -> Result<Array2<f64>> {
    let table = read_table(path)?;
    let missing: Vec<&str> = names.iter().filter(|n| !table.columns.contains(n)).map(String::as_str).collect();
    let extra: Vec<&str> = table.columns.iter().filter(|c| c.as_str() != response && !names.contains(c)).map(String::as_str).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!("missing columns: {}", missing.join(", ")));
        }
        if !extra.is_empty() {
            parts.push(format!("unexpected columns: {}", extra.join(", ")));
        }
        bail!("{}: columns do not match the fitted model ({})", path.display(), parts.join("; "));
    }
    let order: Vec<usize> = names.iter().map(|n| table.columns.iter().position(|c| c == n).expect("checked above")).collect();
    Ok(table.values.select(ndarray::Axis(1), &order))
}
