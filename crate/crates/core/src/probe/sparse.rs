use serde::{Deserialize, Serialize};

use super::ProbeError;

/// Index–value pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self, ProbeError> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(ProbeError::InvalidVector(format!("indices {} and {} are not increasing", w[0].0, w[1].0)));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i as usize >= dim {
                return Err(ProbeError::InvalidVector(format!("index {i} outside dimension {dim}")));
            }
        }
        if let Some(&(i, v)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ProbeError::InvalidVector(format!("value {v} at index {i} is not finite")));
        }
        Ok(SparseVector { dim, entries })
    }

    /// Keeps every coordinate, zeros included.
    pub fn from_dense(values: &[f64]) -> Result<Self, ProbeError> {
        Self::new(values.len(), values.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries.binary_search_by_key(&index, |e| e.0).map_or(0.0, |p| self.entries[p].1)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i as usize]).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }
}
