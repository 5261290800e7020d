//! Backdoor adjustment by treatment parents and adjusted-regression effects.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, NodeId};
use crate::stats::{ols_fit, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteResult {
    pub treatment: NodeId,
    pub outcome: NodeId,
    pub adjustment_set: BTreeSet<NodeId>,
    pub effect: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub naive_effect: f64,
    pub naive_std_error: f64,
}

/// Parents of `treatment`.
pub fn backdoor_adjustment_set(
    g: &MixedGraph,
    treatment: NodeId,
    outcome: NodeId,
) -> Result<BTreeSet<NodeId>> {
    let n = g.node_count();
    for v in [treatment, outcome] {
        if v >= n {
            return Err(Error::UnknownNode(v.to_string()));
        }
    }
    if treatment == outcome {
        return Err(Error::InvalidQuery(
            "treatment and outcome are the same node".into(),
        ));
    }
    if !g.undirected_edges().is_empty() {
        return Err(Error::NotADag(
            "adjustment needs a fully oriented graph".into(),
        ));
    }
    g.topological_sort()?;
    if g.ancestors_of(&[treatment]).contains(&outcome) {
        return Err(Error::InvalidQuery(format!(
            "`{}` is an ancestor of `{}`",
            g.label(outcome),
            g.label(treatment)
        )));
    }
    Ok(g.parents(treatment).into_iter().collect())
}

/// Treatment coefficient with and without the backdoor adjustment set.
pub fn estimate_ate(
    d: &Dataset,
    g: &MixedGraph,
    treatment: NodeId,
    outcome: NodeId,
) -> Result<AteResult> {
    if g.node_count() != d.ncols() {
        return Err(Error::SizeMismatch {
            left: g.node_count(),
            right: d.ncols(),
        });
    }
    let adjustment_set = backdoor_adjustment_set(g, treatment, outcome)?;
    let mut regressors = vec![treatment];
    regressors.extend(adjustment_set.iter().copied());
    let adjusted = ols_fit(d, outcome, &regressors)?;
    let naive = ols_fit(d, outcome, &[treatment])?;
    Ok(AteResult {
        treatment,
        outcome,
        adjustment_set,
        effect: adjusted.coefficients[0],
        std_error: adjusted.std_errors[0],
        p_value: adjusted.p_values[0],
        naive_effect: naive.coefficients[0],
        naive_std_error: naive.std_errors[0],
    })
}
