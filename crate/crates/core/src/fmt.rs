//! Shared text formatting for CSV artifacts.

use std::path::Path;

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits; round-trips exactly.
/// NaN (not available) serializes as an empty cell.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_cell(cell: &str) -> std::result::Result<f64, std::num::ParseFloatError> {
    if cell.is_empty() {
        Ok(f64::NAN)
    } else {
        cell.parse()
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
