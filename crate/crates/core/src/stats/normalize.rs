use serde::{Deserialize, Serialize};

use super::dataset::{mean, sample_variance, Dataset};
use crate::error::{Error, Result};

/// Per-column location and scale used for z-scoring (sample standard
/// deviation, n - 1 denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl NormalizationRecord {
    /// Identity transform over the given columns.
    pub fn identity(columns: Vec<String>) -> Self {
        let p = columns.len();
        Self {
            columns,
            means: vec![0.0; p],
            stds: vec![1.0; p],
        }
    }

    pub fn index_of(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    pub fn to_z(&self, j: usize, raw: f64) -> f64 {
        (raw - self.means[j]) / self.stds[j]
    }

    pub fn to_raw(&self, j: usize, z: f64) -> f64 {
        self.means[j] + z * self.stds[j]
    }

    /// z-scores every column of `d` that this record knows by name.
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        let columns = d
            .names()
            .iter()
            .zip(d.columns())
            .map(|(name, col)| {
                let j = self
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
                Ok(col.iter().map(|&v| self.to_z(j, v)).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Dataset::new(d.names().to_vec(), columns)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.columns.len();
        if self.means.len() != p || self.stds.len() != p {
            return Err(Error::InvalidData(
                "normalization record lengths differ".into(),
            ));
        }
        if let Some(j) = self.stds.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::ZeroVariance {
                column: self.columns[j].clone(),
            });
        }
        Ok(())
    }
}

/// Rescales each column to sample mean 0 and sample standard deviation 1.
pub fn zscore_normalize(d: &Dataset) -> Result<(Dataset, NormalizationRecord)> {
    let mut means = Vec::with_capacity(d.ncols());
    let mut stds = Vec::with_capacity(d.ncols());
    for (name, col) in d.names().iter().zip(d.columns()) {
        let sd = sample_variance(col).sqrt();
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance {
                column: name.clone(),
            });
        }
        means.push(mean(col));
        stds.push(sd);
    }
    let record = NormalizationRecord {
        columns: d.names().to_vec(),
        means,
        stds,
    };
    Ok((record.apply(d)?, record))
}
