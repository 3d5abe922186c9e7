//! Clustering engines and the permutation-minimized error metric.

mod hamming;
mod hier;
mod kmeans;

pub use hamming::hamming_error;
pub use hier::hierarchical_complete;
pub use kmeans::{kmeans, kmeanspp_seed, lloyd, Init, KmeansOptions, KmeansResult, LloydRun};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class labels in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("label vector is empty".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l == 0 || l > k) {
            return Err(Error::InvalidInput(format!("label {bad} outside 1..={k}")));
        }
        Ok(Self { labels, k })
    }

    /// Builds from 0-based assignments.
    pub fn from_zero_based(assign: &[usize], k: usize) -> Result<Self> {
        Self::new(assign.iter().map(|a| a + 1).collect(), k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Squared Euclidean distance.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
