use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ci::{DSeparationOracle, IndependenceTest};
use super::orient_with_knowledge;
use crate::error::{Error, Result};
use crate::graph::{BackgroundKnowledge, MixedGraph, NodeId};
use crate::stats::{Dataset, FisherZ};

/// Bound on the conditioning-set size explored by the skeleton search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DepthLimit {
    /// 3 when there are at least 20 variables, otherwise unlimited.
    #[default]
    Auto,
    Unlimited,
    AtMost(usize),
}

impl DepthLimit {
    fn resolve(self, p: usize) -> Option<usize> {
        match self {
            DepthLimit::Auto if p >= 20 => Some(3),
            DepthLimit::Auto | DepthLimit::Unlimited => None,
            DepthLimit::AtMost(m) => Some(m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PcConfig {
    pub alpha: f64,
    pub max_conditioning_size: DepthLimit,
    /// Freeze adjacency sets per depth (order-independent output).
    pub stable: bool,
    /// Replace the statistical test by d-separation in this DAG.
    pub ci_oracle: Option<MixedGraph>,
    /// Clamp degenerate correlations instead of failing.
    pub lenient: bool,
}

impl Default for PcConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            max_conditioning_size: DepthLimit::Auto,
            stable: true,
            ci_oracle: None,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PcOutcome {
    pub graph: MixedGraph,
    /// Separating set for every pair removed by a test, keyed `(low, high)`.
    pub sepsets: BTreeMap<(NodeId, NodeId), Vec<NodeId>>,
    pub warnings: Vec<String>,
    pub tests_performed: usize,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// First separating set of size `depth` drawn from `adj_a \ {b}`, then from
/// `adj_b \ {a}`, in lexicographic order.
fn find_sepset(
    test: &dyn IndependenceTest,
    a: NodeId,
    b: NodeId,
    adj_a: &[NodeId],
    adj_b: &[NodeId],
    depth: usize,
    counter: &AtomicUsize,
) -> Result<Option<Vec<NodeId>>> {
    let from_a: Vec<NodeId> = adj_a.iter().copied().filter(|&v| v != b).collect();
    let from_b: Vec<NodeId> = adj_b.iter().copied().filter(|&v| v != a).collect();
    for set in from_a.iter().copied().combinations(depth) {
        counter.fetch_add(1, Ordering::Relaxed);
        if test.independent(a, b, &set)? {
            return Ok(Some(set));
        }
    }
    for set in from_b.iter().copied().combinations(depth) {
        if set.iter().all(|v| from_a.contains(v)) {
            continue;
        }
        counter.fetch_add(1, Ordering::Relaxed);
        if test.independent(a, b, &set)? {
            return Ok(Some(set));
        }
    }
    Ok(None)
}

/// PC over an arbitrary independence test.
pub fn pc_with_test(
    labels: &[String],
    test: &dyn IndependenceTest,
    k: &BackgroundKnowledge,
    cfg: &PcConfig,
) -> Result<PcOutcome> {
    let p = labels.len();
    if p < 2 {
        return Err(Error::InvalidData(
            "discovery needs at least two columns".into(),
        ));
    }
    let max_depth = cfg.max_conditioning_size.resolve(p);
    let counter = AtomicUsize::new(0);
    let mut warnings = Vec::new();

    let mut g = MixedGraph::new(labels.to_vec());
    for a in 0..p {
        for b in (a + 1)..p {
            if !k.forbids_adjacency(a, b) {
                g.add_undirected(a, b);
            }
        }
    }
    let protected = |a: NodeId, b: NodeId| k.is_required(a, b) || k.is_required(b, a);

    let mut sepsets: BTreeMap<(NodeId, NodeId), Vec<NodeId>> = BTreeMap::new();
    let mut depth = 0usize;
    loop {
        if max_depth.is_some_and(|m| depth > m) {
            break;
        }
        let pairs: Vec<(NodeId, NodeId)> = g
            .undirected_edges()
            .into_iter()
            .filter(|&(a, b)| !protected(a, b))
            .collect();
        let frozen: Vec<Vec<NodeId>> = (0..p).map(|v| g.adjacent(v)).collect();
        let testable = pairs
            .iter()
            .any(|&(a, b)| frozen[a].len() > depth || frozen[b].len() > depth);
        if !testable {
            break;
        }
        if cfg.stable {
            let found: Vec<Option<Vec<NodeId>>> = pairs
                .par_iter()
                .map(|&(a, b)| find_sepset(test, a, b, &frozen[a], &frozen[b], depth, &counter))
                .collect::<Result<_>>()?;
            for (&(a, b), sep) in pairs.iter().zip(found) {
                if let Some(sep) = sep {
                    g.remove_edge(a, b);
                    sepsets.insert(key(a, b), sep);
                }
            }
        } else {
            for &(a, b) in &pairs {
                if !g.is_adjacent(a, b) {
                    continue;
                }
                let (adj_a, adj_b) = (g.adjacent(a), g.adjacent(b));
                if let Some(sep) = find_sepset(test, a, b, &adj_a, &adj_b, depth, &counter)? {
                    g.remove_edge(a, b);
                    sepsets.insert(key(a, b), sep);
                }
            }
        }
        depth += 1;
    }

    for (a, b) in k.required_edges() {
        if !g.is_adjacent(a, b) {
            return Err(Error::KnowledgeConflict(format!(
                "required edge {} -> {} missing from the skeleton",
                labels[a], labels[b]
            )));
        }
    }

    // unshielded colliders
    for c in 0..p {
        let adj = g.adjacent(c);
        for (i, &a) in adj.iter().enumerate() {
            for &b in &adj[i + 1..] {
                if g.is_adjacent(a, b) {
                    continue;
                }
                let Some(sep) = sepsets.get(&key(a, b)) else {
                    continue;
                };
                if sep.contains(&c) {
                    continue;
                }
                let blocked = [a, b]
                    .into_iter()
                    .find(|&x| g.has_directed(c, x) || !k.allows(x, c));
                if let Some(x) = blocked {
                    warnings.push(format!(
                        "skipped collider {} -> {} <- {}: conflicts at {}",
                        labels[a], labels[c], labels[b], labels[x]
                    ));
                    continue;
                }
                g.add_directed(a, c);
                g.add_directed(b, c);
            }
        }
    }

    orient_with_knowledge(&mut g, k);

    Ok(PcOutcome {
        graph: g,
        sepsets,
        warnings,
        tests_performed: counter.into_inner(),
    })
}

/// PC on a dataset with the Fisher-Z test, or with the d-separation oracle
/// when `cfg.ci_oracle` is set.
pub fn pc_search(d: &Dataset, k: &BackgroundKnowledge, cfg: &PcConfig) -> Result<PcOutcome> {
    if let Some(dag) = &cfg.ci_oracle {
        if dag.node_count() != d.ncols() {
            return Err(Error::SizeMismatch {
                left: dag.node_count(),
                right: d.ncols(),
            });
        }
        return pc_with_test(d.names(), &DSeparationOracle::new(dag), k, cfg);
    }
    let test = FisherZ::new(d, cfg.alpha)?.lenient(cfg.lenient);
    pc_with_test(d.names(), &test, k, cfg)
}

pub fn pc_discover(d: &Dataset, k: &BackgroundKnowledge, cfg: &PcConfig) -> Result<MixedGraph> {
    pc_search(d, k, cfg).map(|o| o.graph)
}

/// PC driven purely by d-separation in `dag`.
pub fn pc_oracle(dag: &MixedGraph, k: &BackgroundKnowledge, cfg: &PcConfig) -> Result<MixedGraph> {
    pc_with_test(dag.labels(), &DSeparationOracle::new(dag), k, cfg).map(|o| o.graph)
}
