//! `{"dim": n, "entries": [[re, im], ...]}` with `n²` row-major pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::numkernel::ComplexMatrix;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = ChannelError;

    fn try_from(j: MatrixJson) -> Result<Self, ChannelError> {
        if j.entries.len() != j.dim * j.dim {
            return Err(ChannelError::Json(format!(
                "expected {} entries for dim {}, found {}",
                j.dim * j.dim,
                j.dim,
                j.entries.len()
            )));
        }
        if let Some(pos) = j.entries.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(ChannelError::Json(format!("non-finite entry at index {pos}")));
        }
        let entries = j.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        Ok(ComplexMatrix::from_entries(j.dim, entries)?)
    }
}

/// Serializes with shortest round-trip float formatting, so re-parsing is bit-exact.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix JSON serialization")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix, ChannelError> {
    // serde_json rejects NaN/Infinity literals already; overflowing literals
    // such as 1e999 are caught by the finiteness check.
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| ChannelError::Json(e.to_string()))?;
    j.try_into()
}

pub fn read_matrix_file(path: &Path) -> Result<ComplexMatrix, ChannelError> {
    matrix_from_json(&fs::read_to_string(path)?)
}

pub fn write_matrix_file(path: &Path, m: &ComplexMatrix) -> Result<(), ChannelError> {
    fs::write(path, matrix_to_json(m) + "\n")?;
    Ok(())
}
