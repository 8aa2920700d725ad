//! Canonical JSON and CSV exchange formats.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same bits, so reruns produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Pretty JSON with a trailing newline; field order follows the struct.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_canonical_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Comma-separated rows under a `prefix_1,...,prefix_d` header.
pub fn points_csv(points: &[Vec<f64>], dim: usize, prefix: &str) -> String {
    let mut out = (1..=dim)
        .map(|i| format!("{prefix}_{i}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Parses numeric rows separated by commas or whitespace.
///
/// Blank lines and lines starting with `#` are skipped; so is a first line
/// that does not parse as numbers (a header). All rows must have equal width.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen_first = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let first = !seen_first;
        seen_first = true;
        match parsed {
            Ok(row) => {
                if let Some(prev) = rows.first()
                    && prev.len() != row.len()
                {
                    return Err(Error::Format(format!(
                        "line {}: expected {} values, found {}",
                        lineno + 1,
                        prev.len(),
                        row.len()
                    )));
                }
                rows.push(row);
            }
            Err(_) if first && fields.iter().any(|f| f.parse::<f64>().is_err()) => {}
            Err(e) => {
                return Err(Error::Format(format!(
                    "line {}: unparsable value ({e}): {line:?}",
                    lineno + 1
                )));
            }
        }
    }
    Ok(rows)
}
