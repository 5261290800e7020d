//! Linear-Gaussian structural causal models: fitting on a DAG, abduction,
//! intervention, counterfactual prediction and least-change recommendations.

mod counterfactual;

pub use counterfactual::{
    abduct_noise, composite_effect, counterfactual, intervene, recommend, recommend_min_change,
    solve_required_intervention, CounterfactualResult, Intervention, Observation, RecommendMode,
    Recommendation,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, NodeId};
use crate::stats::{ols_fit, Dataset};

/// `value = intercept + Σ coefficient · parent + noise`, `noise ~ N(0, noise_variance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub parents: Vec<NodeId>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub noise_variance: f64,
}

impl Equation {
    pub fn constant(value: f64) -> Self {
        Self {
            parents: vec![],
            coefficients: vec![],
            intercept: value,
            noise_variance: 0.0,
        }
    }

    pub fn root(mean: f64, variance: f64) -> Self {
        Self {
            parents: vec![],
            coefficients: vec![],
            intercept: mean,
            noise_variance: variance,
        }
    }

    /// Deterministic part evaluated on full node values.
    pub fn structural_value(&self, values: &[f64]) -> f64 {
        self.intercept
            + self
                .parents
                .iter()
                .zip(&self.coefficients)
                .map(|(&p, c)| c * values[p])
                .sum::<f64>()
    }

    pub fn coefficient(&self, parent: NodeId) -> Option<f64> {
        self.parents
            .iter()
            .position(|&p| p == parent)
            .map(|i| self.coefficients[i])
    }
}

/// A DAG with one linear equation per node. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScm {
    graph: MixedGraph,
    equations: Vec<Equation>,
    order: Vec<NodeId>,
}

impl LinearScm {
    /// Checks that every equation's parents are exactly the graph parents.
    pub fn new(graph: MixedGraph, equations: Vec<Equation>) -> Result<Self> {
        if equations.len() != graph.node_count() {
            return Err(Error::SizeMismatch {
                left: graph.node_count(),
                right: equations.len(),
            });
        }
        let order = graph.topological_sort()?;
        for (v, eq) in equations.iter().enumerate() {
            let mut listed = eq.parents.clone();
            listed.sort_unstable();
            if listed != graph.parents(v) || eq.coefficients.len() != eq.parents.len() {
                return Err(Error::InvalidData(format!(
                    "equation for `{}` does not match its graph parents",
                    graph.label(v)
                )));
            }
            if !eq.intercept.is_finite()
                || !eq.coefficients.iter().all(|c| c.is_finite())
                || !(eq.noise_variance >= 0.0 && eq.noise_variance.is_finite())
            {
                return Err(Error::InvalidData(format!(
                    "equation for `{}` has non-finite or negative terms",
                    graph.label(v)
                )));
            }
        }
        Ok(Self {
            graph,
            equations,
            order,
        })
    }

    /// Builds the graph from the equations' parent lists.
    pub fn from_equations<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        equations: Vec<Equation>,
    ) -> Result<Self> {
        let edges: Vec<(NodeId, NodeId)> = equations
            .iter()
            .enumerate()
            .flat_map(|(v, eq)| eq.parents.iter().map(move |&p| (p, v)))
            .collect();
        let graph = MixedGraph::dag_from_edges(labels, &edges)?;
        Self::new(graph, equations)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn equation(&self, v: NodeId) -> &Equation {
        &self.equations[v]
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn labels(&self) -> &[String] {
        self.graph.labels()
    }

    pub fn label(&self, v: NodeId) -> &str {
        self.graph.label(v)
    }

    pub fn index_of(&self, name: &str) -> Result<NodeId> {
        self.graph
            .index_of(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Same model with every intercept set to zero.
    pub fn with_zero_intercepts(mut self) -> Self {
        for eq in &mut self.equations {
            eq.intercept = 0.0;
        }
        self
    }

    /// Values implied by the given noise terms, in topological order.
    pub fn propagate(&self, noise: &[f64]) -> Vec<f64> {
        let mut values = vec![0.0; self.node_count()];
        for &v in &self.order {
            values[v] = self.equations[v].structural_value(&values) + noise[v];
        }
        values
    }

    pub fn to_json(&self) -> ScmJson {
        let labels = self.labels();
        ScmJson {
            nodes: labels.to_vec(),
            equations: self
                .equations
                .iter()
                .enumerate()
                .map(|(v, eq)| {
                    (
                        labels[v].clone(),
                        EquationJson {
                            parents: eq.parents.iter().map(|&p| labels[p].clone()).collect(),
                            coefficients: eq.coefficients.clone(),
                            intercept: eq.intercept,
                            noise_variance: eq.noise_variance,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ScmJson) -> Result<Self> {
        let index = |name: &str| {
            json.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownNode(name.to_string()))
        };
        let mut equations = Vec::with_capacity(json.nodes.len());
        for name in &json.nodes {
            let eq = json
                .equations
                .get(name)
                .ok_or_else(|| Error::InvalidData(format!("no equation for node `{name}`")))?;
            if eq.parents.len() != eq.coefficients.len() {
                return Err(Error::InvalidData(format!(
                    "equation for `{name}` lists {} parents and {} coefficients",
                    eq.parents.len(),
                    eq.coefficients.len()
                )));
            }
            equations.push(Equation {
                parents: eq.parents.iter().map(|p| index(p)).collect::<Result<_>>()?,
                coefficients: eq.coefficients.clone(),
                intercept: eq.intercept,
                noise_variance: eq.noise_variance,
            });
        }
        for name in json.equations.keys() {
            index(name)?;
        }
        Self::from_equations(json.nodes.clone(), equations)
    }
}

/// `{"nodes": [...], "equations": {"node": {"parents": [...], "coefficients": [...],
/// "intercept": r, "noise_variance": r}}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmJson {
    pub nodes: Vec<String>,
    pub equations: BTreeMap<String, EquationJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationJson {
    pub parents: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub noise_variance: f64,
}

/// Fits each node by OLS on its graph parents. Parentless nodes get the
/// sample mean and sample variance.
pub fn fit_linear_scm(d: &Dataset, g: &MixedGraph) -> Result<LinearScm> {
    if g.node_count() != d.ncols() {
        return Err(Error::SizeMismatch {
            left: g.node_count(),
            right: d.ncols(),
        });
    }
    if g.labels() != d.names() {
        return Err(Error::InvalidData(
            "graph node names do not match dataset columns".into(),
        ));
    }
    if !g.undirected_edges().is_empty() {
        return Err(Error::NotADag(
            "graph has undirected edges; orient them with background knowledge".into(),
        ));
    }
    g.topological_sort()?;
    let equations = (0..d.ncols())
        .map(|v| {
            let parents = g.parents(v);
            let fit = ols_fit(d, v, &parents)?;
            Ok(Equation {
                parents,
                coefficients: fit.coefficients,
                intercept: fit.intercept,
                noise_variance: fit.residual_variance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LinearScm::new(g.clone(), equations)
}
