use nalgebra::DMatrix;

use super::dataset::{mean, Dataset};
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Systems with a smaller reciprocal condition number are treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Sample covariance matrix with the given denominator offset (`ddof = 1`
/// for the unbiased estimate, `0` for maximum likelihood).
pub fn covariance_matrix(d: &Dataset, ddof: usize) -> DMatrix<f64> {
    let (n, p) = d.shape();
    let centred: Vec<Vec<f64>> = d
        .columns()
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|x| x - m).collect()
        })
        .collect();
    let denom = (n.saturating_sub(ddof)).max(1) as f64;
    let mut cov = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let s: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
            cov[(i, j)] = s / denom;
            cov[(j, i)] = s / denom;
        }
    }
    cov
}

/// Pearson correlation matrix; the diagonal is exactly 1.
pub fn correlation_matrix(d: &Dataset) -> Result<DMatrix<f64>> {
    let cov = covariance_matrix(d, 1);
    let p = d.ncols();
    for j in 0..p {
        if cov[(j, j)] <= 0.0 {
            return Err(Error::ZeroVariance {
                column: d.name(j).to_string(),
            });
        }
    }
    let sd: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    }))
}

/// Reciprocal 2-norm condition number of a symmetric matrix.
pub fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Partial correlation of `a` and `b` given `conditioning`, from the residual
/// covariance `C[ab,ab] - C[ab,S] C[S,S]^-1 C[S,ab]`. With an empty
/// conditioning set this is `corr[(a, b)]` itself.
pub fn partial_correlation(
    corr: &DMatrix<f64>,
    a: NodeId,
    b: NodeId,
    conditioning: &[NodeId],
) -> Result<f64> {
    debug_assert!(!conditioning.contains(&a) && !conditioning.contains(&b));
    if conditioning.is_empty() {
        return Ok(corr[(a, b)]);
    }
    let s = submatrix(corr, conditioning, conditioning);
    let rcond = reciprocal_condition(&s);
    if rcond < SINGULAR_RCOND {
        return Err(Error::SingularMatrix { rcond });
    }
    let chol = s.cholesky().ok_or(Error::SingularMatrix { rcond })?;
    let cross = submatrix(corr, conditioning, &[a, b]);
    let solved = chol.solve(&cross);
    let explained = cross.transpose() * solved;
    let vaa = corr[(a, a)] - explained[(0, 0)];
    let vbb = corr[(b, b)] - explained[(1, 1)];
    let vab = corr[(a, b)] - explained[(0, 1)];
    if vaa <= f64::EPSILON || vbb <= f64::EPSILON {
        return Err(Error::SingularMatrix { rcond: 0.0 });
    }
    Ok((vab / (vaa * vbb).sqrt()).clamp(-1.0, 1.0))
}
