//! Mixed graphs (DAGs, skeletons and CPDAGs), d-separation, equivalence-class
//! conversion and graph distances.
//!
//! A [`MixedGraph`] stores one boolean mark per ordered pair: `a -> b` is
//! encoded as `mark(a, b) && !mark(b, a)` and `a -- b` as both marks set. The
//! encoding makes "a pair appears in at most one edge set" hold by
//! construction.

mod cpdag;
mod dsep;
mod knowledge;
mod metrics;

pub use cpdag::{apply_meek_rules, consistent_extension, dag_to_cpdag, v_structures};
pub use dsep::d_separated;
pub use knowledge::{BackgroundKnowledge, KnowledgeJson};
pub use metrics::shd;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 0-based column index into a dataset.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    labels: Vec<String>,
    marks: Vec<bool>,
}

/// On-disk graph representation: explicit edge lists over indexed node names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[usize; 2]>,
    #[serde(default)]
    pub undirected: Vec<[usize; 2]>,
}

impl MixedGraph {
    /// Edgeless graph over the given node labels.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Self {
            labels,
            marks: vec![false; n * n],
        }
    }

    /// Edgeless graph with labels `X0..X{n-1}`.
    pub fn empty(n: usize) -> Self {
        Self::new((0..n).map(|i| format!("X{i}")))
    }

    /// Builds a DAG from a directed edge list, rejecting cycles.
    pub fn dag_from_edges<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self> {
        let mut g = Self::new(labels);
        for &(a, b) in edges {
            g.check_pair(a, b)?;
            if g.has_directed(b, a) {
                return Err(Error::Cycle);
            }
            g.add_directed(a, b);
        }
        if g.has_directed_cycle() {
            return Err(Error::Cycle);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, name: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == name)
    }

    fn check_pair(&self, a: NodeId, b: NodeId) -> Result<()> {
        let n = self.node_count();
        if a >= n {
            return Err(Error::UnknownNode(a.to_string()));
        }
        if b >= n {
            return Err(Error::UnknownNode(b.to_string()));
        }
        if a == b {
            return Err(Error::InvalidData(format!("self-loop on node {a}")));
        }
        Ok(())
    }

    #[inline]
    fn mark(&self, a: NodeId, b: NodeId) -> bool {
        self.marks[a * self.labels.len() + b]
    }

    #[inline]
    fn set_mark(&mut self, a: NodeId, b: NodeId, value: bool) {
        let n = self.labels.len();
        self.marks[a * n + b] = value;
    }

    /// Sets the pair to `a -> b`, replacing whatever edge was there.
    pub fn add_directed(&mut self, a: NodeId, b: NodeId) {
        assert_ne!(a, b, "self-loops are not allowed");
        self.set_mark(a, b, true);
        self.set_mark(b, a, false);
    }

    /// Sets the pair to `a -- b`, replacing whatever edge was there.
    pub fn add_undirected(&mut self, a: NodeId, b: NodeId) {
        assert_ne!(a, b, "self-loops are not allowed");
        self.set_mark(a, b, true);
        self.set_mark(b, a, true);
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) {
        self.set_mark(a, b, false);
        self.set_mark(b, a, false);
    }

    pub fn has_directed(&self, a: NodeId, b: NodeId) -> bool {
        self.mark(a, b) && !self.mark(b, a)
    }

    pub fn has_undirected(&self, a: NodeId, b: NodeId) -> bool {
        self.mark(a, b) && self.mark(b, a)
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.mark(a, b) || self.mark(b, a)
    }

    /// Nodes `u` with `u -> v`.
    pub fn parents(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&u| self.has_directed(u, v))
            .collect()
    }

    /// Nodes `w` with `v -> w`.
    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&w| self.has_directed(v, w))
            .collect()
    }

    /// Nodes `w` with `v -- w`.
    pub fn undirected_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&w| self.has_undirected(v, w))
            .collect()
    }

    /// Every node sharing an edge of any kind with `v`.
    pub fn adjacent(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&w| w != v && self.is_adjacent(v, w))
            .collect()
    }

    /// Directed edges in lexicographic order.
    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.has_directed(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Undirected edges as `(low, high)` pairs in lexicographic order.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.has_undirected(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.directed_edges().len() + self.undirected_edges().len()
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.directed_topological_order().is_none()
    }

    /// Fully directed and acyclic.
    pub fn is_dag(&self) -> bool {
        self.undirected_edges().is_empty() && !self.has_directed_cycle()
    }

    /// Kahn's algorithm over the directed part, smallest index first.
    fn directed_topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.node_count();
        let mut indegree = vec![0usize; n];
        for (_, b) in self.directed_edges() {
            indegree[b] += 1;
        }
        let mut ready: BinaryHeap<Reverse<NodeId>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for w in self.children(v) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Topological order of a DAG; ties go to the smallest node index.
    pub fn topological_sort(&self) -> Result<Vec<NodeId>> {
        if !self.undirected_edges().is_empty() {
            return Err(Error::NotADag("graph has undirected edges".into()));
        }
        self.directed_topological_order().ok_or(Error::Cycle)
    }

    /// Same nodes, every adjacency replaced by an undirected edge.
    pub fn skeleton(&self) -> MixedGraph {
        let mut g = MixedGraph::new(self.labels.clone());
        let n = self.node_count();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.is_adjacent(a, b) {
                    g.add_undirected(a, b);
                }
            }
        }
        g
    }

    /// Nodes with a directed path into some member of `targets`, targets included.
    pub fn ancestors_of(&self, targets: &[NodeId]) -> BTreeSet<NodeId> {
        let mut seen: BTreeSet<NodeId> = targets.iter().copied().collect();
        let mut queue: VecDeque<NodeId> = targets.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for u in self.parents(v) {
                if seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Nodes reachable from `v` along directed edges, `v` excluded.
    pub fn descendants_of(&self, v: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for w in self.children(u) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.labels.clone(),
            directed: self
                .directed_edges()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect(),
            undirected: self
                .undirected_edges()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in &json.nodes {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateHeader(name.clone()));
            }
        }
        let mut g = MixedGraph::new(json.nodes.clone());
        for &[a, b] in &json.directed {
            g.check_pair(a, b)?;
            if g.is_adjacent(a, b) {
                return Err(Error::InvalidData(format!("pair ({a}, {b}) listed twice")));
            }
            g.add_directed(a, b);
        }
        for &[a, b] in &json.undirected {
            g.check_pair(a, b)?;
            if g.is_adjacent(a, b) {
                return Err(Error::InvalidData(format!("pair ({a}, {b}) listed twice")));
            }
            g.add_undirected(a, b);
        }
        Ok(g)
    }

    /// Graphviz export. Undirected edges carry `[dir=none]`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for label in &self.labels {
            let _ = writeln!(out, "  \"{}\";", escape_dot(label));
        }
        for (a, b) in self.directed_edges() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\";",
                escape_dot(&self.labels[a]),
                escape_dot(&self.labels[b])
            );
        }
        for (a, b) in self.undirected_edges() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [dir=none];",
                escape_dot(&self.labels[a]),
                escape_dot(&self.labels[b])
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Free-function form of [`MixedGraph::topological_sort`].
pub fn topological_sort(g: &MixedGraph) -> Result<Vec<NodeId>> {
    g.topological_sort()
}
