//! File writing and the parsed-value digest of heatmap CSVs.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CSV_HEADER: &str = "x_m,y_m,psr";

/// Parses a heatmap CSV into `(x, y, psr)` rows.
pub fn parse_csv(text: &str) -> Result<Vec<[f64; 3]>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => {
            return Err(CliError::Usage(format!(
                "unexpected CSV header '{}' (expected '{CSV_HEADER}')",
                h.trim()
            )))
        }
        None => return Err(CliError::Usage("empty CSV".into())),
    }
    let names = ["x_m", "y_m", "psr"];
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Usage(format!("CSV line {}: expected 3 fields", i + 2)));
        }
        let mut row = [0.0; 3];
        for (k, f) in fields.iter().enumerate() {
            row[k] = f.trim().parse().map_err(|_| {
                CliError::Usage(format!("CSV line {}: column {} is not a number: '{f}'", i + 2, names[k]))
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// SHA-256 over the little-endian bytes of every parsed value, row by row.
/// Any reader that parses the same numbers gets the same digest, whatever
/// the textual formatting.
pub fn digest_rows(rows: &[[f64; 3]]) -> String {
    let mut h = Sha256::new();
    for r in rows {
        for v in r {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

pub fn csv_digest(text: &str) -> Result<String, CliError> {
    Ok(digest_rows(&parse_csv(text)?))
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create output directory {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}
