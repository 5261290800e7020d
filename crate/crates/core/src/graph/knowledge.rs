use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{MixedGraph, NodeId};
use crate::error::{Error, Result};

/// Prior constraints on discovery: temporal tiers plus explicit forbidden and
/// required directed edges.
///
/// An edge from a later tier into an earlier tier is forbidden; edges within a
/// tier, or touching a node that sits in no tier, are unconstrained by tiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BackgroundKnowledge {
    tiers: Vec<Vec<NodeId>>,
    tier_of: BTreeMap<NodeId, usize>,
    forbidden: BTreeSet<(NodeId, NodeId)>,
    required: BTreeSet<(NodeId, NodeId)>,
}

/// Name-based knowledge file:
/// `{"tiers": [["a","b"],["y"]], "forbidden": [["y","a"]], "required": []}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeJson {
    #[serde(default)]
    pub tiers: Vec<Vec<String>>,
    #[serde(default)]
    pub forbidden: Vec<[String; 2]>,
    #[serde(default)]
    pub required: Vec<[String; 2]>,
}

impl BackgroundKnowledge {
    /// No constraints.
    pub fn none() -> Self {
        Self::default()
    }

    /// Validated knowledge over `node_count` nodes.
    pub fn new(
        node_count: usize,
        tiers: Vec<Vec<NodeId>>,
        forbidden: impl IntoIterator<Item = (NodeId, NodeId)>,
        required: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut tier_of = BTreeMap::new();
        for (t, tier) in tiers.iter().enumerate() {
            for &v in tier {
                check_node(v, node_count)?;
                if tier_of.insert(v, t).is_some() {
                    return Err(Error::KnowledgeConflict(format!(
                        "node {v} appears in more than one tier"
                    )));
                }
            }
        }
        let forbidden: BTreeSet<_> = forbidden.into_iter().collect();
        let required: BTreeSet<_> = required.into_iter().collect();
        for &(a, b) in forbidden.iter().chain(&required) {
            check_node(a, node_count)?;
            check_node(b, node_count)?;
            if a == b {
                return Err(Error::KnowledgeConflict(format!("self-loop on node {a}")));
            }
        }
        let k = Self {
            tiers,
            tier_of,
            forbidden,
            required,
        };
        k.check_required(node_count)?;
        Ok(k)
    }

    fn check_required(&self, node_count: usize) -> Result<()> {
        for &(a, b) in &self.required {
            if self.forbidden.contains(&(a, b)) {
                return Err(Error::KnowledgeConflict(format!(
                    "edge {a} -> {b} is both required and forbidden"
                )));
            }
            if self.tier_forbids(a, b) {
                return Err(Error::KnowledgeConflict(format!(
                    "required edge {a} -> {b} points into an earlier tier"
                )));
            }
            if self.required.contains(&(b, a)) {
                return Err(Error::KnowledgeConflict(format!(
                    "edges {a} -> {b} and {b} -> {a} are both required"
                )));
            }
        }
        let edges: Vec<_> = self.required.iter().copied().collect();
        if MixedGraph::dag_from_edges((0..node_count).map(|i| i.to_string()), &edges).is_err() {
            return Err(Error::KnowledgeConflict(
                "required edges form a directed cycle".into(),
            ));
        }
        Ok(())
    }

    /// Resolves a name-based knowledge file against column names.
    pub fn from_named(json: &KnowledgeJson, columns: &[String]) -> Result<Self> {
        let resolve = |name: &String| {
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))
        };
        let tiers = json
            .tiers
            .iter()
            .map(|tier| tier.iter().map(resolve).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let forbidden = json
            .forbidden
            .iter()
            .map(|[a, b]| Ok((resolve(a)?, resolve(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let required = json
            .required
            .iter()
            .map(|[a, b]| Ok((resolve(a)?, resolve(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(columns.len(), tiers, forbidden, required)
    }

    pub fn to_named(&self, columns: &[String]) -> KnowledgeJson {
        let name = |v: NodeId| columns[v].clone();
        KnowledgeJson {
            tiers: self
                .tiers
                .iter()
                .map(|t| t.iter().map(|&v| name(v)).collect())
                .collect(),
            forbidden: self
                .forbidden
                .iter()
                .map(|&(a, b)| [name(a), name(b)])
                .collect(),
            required: self
                .required
                .iter()
                .map(|&(a, b)| [name(a), name(b)])
                .collect(),
        }
    }

    pub fn tiers(&self) -> &[Vec<NodeId>] {
        &self.tiers
    }

    pub fn tier_of(&self, v: NodeId) -> Option<usize> {
        self.tier_of.get(&v).copied()
    }

    pub fn required_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.required.iter().copied()
    }

    pub fn explicitly_forbidden(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.forbidden.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty() && self.forbidden.is_empty() && self.required.is_empty()
    }

    fn tier_forbids(&self, a: NodeId, b: NodeId) -> bool {
        matches!((self.tier_of(a), self.tier_of(b)), (Some(ta), Some(tb)) if ta > tb)
    }

    /// `a -> b` is ruled out, explicitly or by tier order.
    pub fn is_forbidden(&self, a: NodeId, b: NodeId) -> bool {
        self.forbidden.contains(&(a, b)) || self.tier_forbids(a, b)
    }

    pub fn is_required(&self, a: NodeId, b: NodeId) -> bool {
        self.required.contains(&(a, b))
    }

    /// `a -> b` may appear in an output graph.
    pub fn allows(&self, a: NodeId, b: NodeId) -> bool {
        !self.is_forbidden(a, b) && !self.is_required(b, a)
    }

    /// Neither orientation of the pair is permitted.
    pub fn forbids_adjacency(&self, a: NodeId, b: NodeId) -> bool {
        !self.allows(a, b) && !self.allows(b, a)
    }

    /// Checks a graph against the constraints: no forbidden directed edge,
    /// every required edge present with its orientation.
    pub fn violations(&self, g: &MixedGraph) -> Vec<String> {
        let mut out = Vec::new();
        for (a, b) in g.directed_edges() {
            if self.is_forbidden(a, b) {
                out.push(format!("forbidden edge {} -> {}", g.label(a), g.label(b)));
            }
        }
        for &(a, b) in &self.required {
            if !g.has_directed(a, b) {
                out.push(format!(
                    "missing required edge {} -> {}",
                    g.label(a),
                    g.label(b)
                ));
            }
        }
        out
    }
}

fn check_node(v: NodeId, node_count: usize) -> Result<()> {
    if v >= node_count {
        Err(Error::UnknownNode(v.to_string()))
    } else {
        Ok(())
    }
}
