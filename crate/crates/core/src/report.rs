use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Paper,
    Derived,
    Trivial,
}

/// One line of a check report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub quantity: String,
    pub inputs: String,
    pub expected: f64,
    pub actual: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub pass: bool,
}

fn relative(expected: f64, actual: f64) -> f64 {
    if expected == actual {
        return 0.0;
    }
    (actual - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

impl CheckRow {
    /// Passes when `|actual - expected| <= tolerance * |expected|`.
    pub fn close(quantity: &str, inputs: String, expected: f64, actual: f64, tolerance: f64, provenance: Provenance) -> Self {
        let rel_err = relative(expected, actual);
        CheckRow {
            quantity: quantity.into(),
            inputs,
            expected,
            actual,
            rel_err,
            tolerance,
            provenance,
            pass: rel_err <= tolerance,
        }
    }

    /// Passes when `|actual - expected| <= tolerance` (absolute).
    pub fn near(quantity: &str, inputs: String, expected: f64, actual: f64, tolerance: f64, provenance: Provenance) -> Self {
        let mut row = CheckRow::close(quantity, inputs, expected, actual, tolerance, provenance);
        row.pass = (actual - expected).abs() <= tolerance;
        row
    }

    /// Passes when `actual <= bound + tolerance`.
    pub fn at_most(quantity: &str, inputs: String, bound: f64, actual: f64, tolerance: f64, provenance: Provenance) -> Self {
        let mut row = CheckRow::close(quantity, inputs, bound, actual, tolerance, provenance);
        row.pass = actual <= bound + tolerance;
        row
    }

    /// A worst-case deviation that should vanish: expected 0, passes when `actual <= tolerance`.
    pub fn deviation(quantity: &str, inputs: String, actual: f64, tolerance: f64, provenance: Provenance) -> Self {
        CheckRow {
            quantity: quantity.into(),
            inputs,
            expected: 0.0,
            actual,
            rel_err: actual,
            tolerance,
            provenance,
            pass: actual <= tolerance,
        }
    }

    /// A yes/no check, reported as expected 1 and actual 1 or 0.
    pub fn flag(quantity: &str, inputs: String, ok: bool, provenance: Provenance) -> Self {
        CheckRow {
            quantity: quantity.into(),
            inputs,
            expected: 1.0,
            actual: if ok { 1.0 } else { 0.0 },
            rel_err: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            provenance,
            pass: ok,
        }
    }
}

pub fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

pub fn to_csv(rows: &[CheckRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json(rows: &[CheckRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Io(e.to_string()))
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_columns() {
        let rows = vec![CheckRow::close("e1", "a=-1".into(), 2.0, 2.0, 1e-9, Provenance::Paper)];
        let text = to_csv(&rows).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, "quantity,inputs,expected,actual,rel_err,tolerance,provenance,pass");
        assert!(text.lines().nth(1).unwrap().ends_with("PAPER,true"));
    }

    #[test]
    fn check_kinds() {
        assert!(CheckRow::at_most("x", String::new(), 1.0, 1.0 + 1e-12, 1e-9, Provenance::Derived).pass);
        assert!(!CheckRow::close("x", String::new(), 1.0, 1.1, 1e-3, Provenance::Derived).pass);
        assert!(CheckRow::near("x", String::new(), 0.0, 1e-12, 1e-9, Provenance::Trivial).pass);
        assert!(!CheckRow::flag("x", String::new(), false, Provenance::Trivial).pass);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
    }
}
