use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::correlation::{correlation_matrix, partial_correlation};
use super::dataset::Dataset;
use super::dist::normal_two_sided_p;
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// `|r|` at or above this bound makes the Fisher transform degenerate.
pub const DEGENERATE_R: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiTestResult {
    /// `sqrt(n - |S| - 3) * |atanh(r)|`
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
    pub conditioning_size: usize,
}

/// Fisher-Z conditional-independence test over a precomputed correlation
/// matrix, shareable across threads.
#[derive(Debug, Clone)]
pub struct FisherZ {
    corr: DMatrix<f64>,
    n: usize,
    alpha: f64,
    lenient: bool,
}

impl FisherZ {
    pub fn new(d: &Dataset, alpha: f64) -> Result<Self> {
        Self::from_correlation(correlation_matrix(d)?, d.nrows(), alpha)
    }

    pub fn from_correlation(corr: DMatrix<f64>, n: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            corr,
            n,
            alpha,
            lenient: false,
        })
    }

    /// Clamp `|r|` just below 1 instead of failing on degenerate correlations.
    pub fn lenient(mut self, lenient: bool) -> Self {
        self.lenient = lenient;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.corr
    }

    pub fn test(&self, a: NodeId, b: NodeId, conditioning: &[NodeId]) -> Result<CiTestResult> {
        let k = conditioning.len();
        if self.n <= k + 3 {
            return Err(Error::InsufficientSample {
                n: self.n,
                needed: k + 3,
            });
        }
        let mut r = partial_correlation(&self.corr, a, b, conditioning)?;
        if r.abs() >= DEGENERATE_R {
            if !self.lenient {
                return Err(Error::DegenerateCorrelation { r });
            }
            r = r.signum() * DEGENERATE_R;
        }
        let z = r.atanh();
        let statistic = ((self.n - k - 3) as f64).sqrt() * z.abs();
        let p_value = normal_two_sided_p(statistic);
        Ok(CiTestResult {
            statistic,
            p_value,
            independent: p_value > self.alpha,
            conditioning_size: k,
        })
    }
}

/// One-shot Fisher-Z test on a dataset.
pub fn fisher_z_ci_test(
    d: &Dataset,
    a: NodeId,
    b: NodeId,
    conditioning: &[NodeId],
    alpha: f64,
) -> Result<CiTestResult> {
    d.check_node(a)?;
    d.check_node(b)?;
    for &c in conditioning {
        d.check_node(c)?;
    }
    FisherZ::new(d, alpha)?.test(a, b, conditioning)
}
