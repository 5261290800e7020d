use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::correlation::{reciprocal_condition, SINGULAR_RCOND};
use super::dataset::{mean, sample_variance, Dataset};
use super::dist::student_t_two_sided_p;
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Least-squares fit of one column on others, intercept included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub outcome: NodeId,
    pub regressors: Vec<NodeId>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub intercept: f64,
    pub intercept_std_error: f64,
    /// `RSS / (n - k - 1)`
    pub residual_variance: f64,
    pub rss: f64,
    pub n_used: usize,
}

impl OlsFit {
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.regressors.iter().position(|&r| r == node)
    }

    pub fn coefficient(&self, node: NodeId) -> Option<f64> {
        self.position(node).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, node: NodeId) -> Option<f64> {
        self.position(node).map(|i| self.std_errors[i])
    }

    pub fn p_value(&self, node: NodeId) -> Option<f64> {
        self.position(node).map(|i| self.p_values[i])
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.n_used - self.regressors.len() - 1
    }

    /// Fitted values on the rows of `d`.
    pub fn predict(&self, d: &Dataset) -> Vec<f64> {
        (0..d.nrows())
            .map(|i| {
                self.intercept
                    + self
                        .regressors
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(&r, c)| c * d.column(r)[i])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn residuals(&self, d: &Dataset) -> Vec<f64> {
        let y = d.column(self.outcome);
        self.predict(d).iter().zip(y).map(|(f, y)| y - f).collect()
    }
}

fn p_value_for(coef: f64, se: f64, df: f64) -> (f64, f64) {
    if se > 0.0 {
        let t = coef / se;
        (t, student_t_two_sided_p(t, df))
    } else if coef == 0.0 {
        (0.0, 1.0)
    } else {
        (coef.signum() * f64::INFINITY, 0.0)
    }
}

/// Regresses `outcome` on `regressors` (plus intercept). Standard errors use
/// the residual variance and the inverse Gram matrix; p-values are two-sided
/// Student-t with `n - k - 1` degrees of freedom.
pub fn ols_fit(d: &Dataset, outcome: NodeId, regressors: &[NodeId]) -> Result<OlsFit> {
    d.check_node(outcome)?;
    for &r in regressors {
        d.check_node(r)?;
    }
    let n = d.nrows();
    let k = regressors.len();
    if n <= k + 1 {
        return Err(Error::InsufficientSample { n, needed: k + 1 });
    }
    let context = || {
        let names: Vec<&str> = regressors.iter().map(|&r| d.name(r)).collect();
        format!("{} ~ {}", d.name(outcome), names.join(" + "))
    };
    if regressors.contains(&outcome) {
        return Err(Error::RankDeficiency { context: context() });
    }
    let y = d.column(outcome);
    let y_mean = mean(y);
    let df = (n - k - 1) as f64;

    if k == 0 {
        let rss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
        let residual_variance = sample_variance(y);
        return Ok(OlsFit {
            outcome,
            regressors: vec![],
            coefficients: vec![],
            std_errors: vec![],
            t_values: vec![],
            p_values: vec![],
            intercept: y_mean,
            intercept_std_error: (residual_variance / n as f64).sqrt(),
            residual_variance,
            rss,
            n_used: n,
        });
    }

    let x_means: Vec<f64> = regressors.iter().map(|&r| mean(d.column(r))).collect();
    let xc = DMatrix::from_fn(n, k, |i, j| d.column(regressors[j])[i] - x_means[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let gram = xc.transpose() * &xc;
    let scale: Vec<f64> = (0..k).map(|j| gram[(j, j)].sqrt()).collect();
    if scale.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::RankDeficiency { context: context() });
    }
    let scaled = DMatrix::from_fn(k, k, |i, j| gram[(i, j)] / (scale[i] * scale[j]));
    if reciprocal_condition(&scaled) < SINGULAR_RCOND {
        return Err(Error::RankDeficiency { context: context() });
    }
    let chol = scaled
        .cholesky()
        .ok_or_else(|| Error::RankDeficiency { context: context() })?;
    let scaled_inv = chol.inverse();
    let gram_inv = DMatrix::from_fn(k, k, |i, j| scaled_inv[(i, j)] / (scale[i] * scale[j]));
    let beta = &gram_inv * (xc.transpose() * &yc);

    let resid = &yc - &xc * &beta;
    let rss = resid.dot(&resid);
    let residual_variance = (rss / df).max(0.0);

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..k)
        .map(|j| (residual_variance * gram_inv[(j, j)]).max(0.0).sqrt())
        .collect();
    let (t_values, p_values): (Vec<f64>, Vec<f64>) = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(&c, &se)| p_value_for(c, se, df))
        .unzip();
    let xbar = DVector::from_vec(x_means.clone());
    let intercept = y_mean - xbar.dot(&beta);
    let intercept_std_error = (residual_variance
        * (1.0 / n as f64 + xbar.dot(&(&gram_inv * &xbar))))
    .max(0.0)
    .sqrt();

    Ok(OlsFit {
        outcome,
        regressors: regressors.to_vec(),
        coefficients,
        std_errors,
        t_values,
        p_values,
        intercept,
        intercept_std_error,
        residual_variance,
        rss,
        n_used: n,
    })
}
