use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Named numeric columns over `n` observations. Every entry is finite and
/// column names are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n: usize,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidData("dataset has no columns".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateHeader(name.clone()));
            }
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value in column `{name}` at row {i}"
                )));
            }
        }
        Ok(Self { names, columns, n })
    }

    /// Row-major construction.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidData(format!(
                    "row {i} has {} values, expected {p}",
                    row.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::new(names, columns)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// `(n, p)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.columns.len())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: NodeId) -> &str {
        &self.names[j]
    }

    pub fn index_of(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|c| c == name)
    }

    pub fn column(&self, j: NodeId) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Sub-dataset restricted to the given columns, in the given order.
    pub fn select(&self, cols: &[NodeId]) -> Result<Self> {
        Self::new(
            cols.iter().map(|&j| self.names[j].clone()).collect(),
            cols.iter().map(|&j| self.columns[j].clone()).collect(),
        )
    }

    pub(crate) fn check_node(&self, j: NodeId) -> Result<()> {
        if j < self.ncols() {
            Ok(())
        } else {
            Err(Error::UnknownNode(j.to_string()))
        }
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator); 0 for a single observation.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
