use super::{MixedGraph, NodeId};
use crate::error::{Error, Result};

/// Unshielded colliders `(a, c, b)` with `a -> c <- b`, `a < b` and `a`, `b`
/// non-adjacent.
pub fn v_structures(g: &MixedGraph) -> Vec<(NodeId, NodeId, NodeId)> {
    let mut out = Vec::new();
    for c in 0..g.node_count() {
        let parents = g.parents(c);
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                if !g.is_adjacent(a, b) {
                    out.push((a, c, b));
                }
            }
        }
    }
    out
}

/// CPDAG of the Markov equivalence class of `dag`: the skeleton with
/// v-structures directed, closed under the orientation rules.
pub fn dag_to_cpdag(dag: &MixedGraph) -> Result<MixedGraph> {
    if !dag.undirected_edges().is_empty() {
        return Err(Error::NotADag("graph has undirected edges".into()));
    }
    if dag.has_directed_cycle() {
        return Err(Error::Cycle);
    }
    let mut g = dag.skeleton();
    for (a, c, b) in v_structures(dag) {
        g.add_directed(a, c);
        g.add_directed(b, c);
    }
    apply_meek_rules(&mut g, &|_, _| true);
    Ok(g)
}

fn should_orient(g: &MixedGraph, a: NodeId, b: NodeId) -> bool {
    let n = g.node_count();
    // R1: c -> a -- b, c and b non-adjacent
    if (0..n).any(|c| c != b && g.has_directed(c, a) && !g.is_adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b
    if (0..n).any(|c| g.has_directed(a, c) && g.has_directed(c, b)) {
        return true;
    }
    // R3: a -- c -> b, a -- d -> b, c and d non-adjacent
    let mids: Vec<NodeId> = (0..n)
        .filter(|&c| c != b && g.has_undirected(a, c) && g.has_directed(c, b))
        .collect();
    for (i, &c) in mids.iter().enumerate() {
        if mids[i + 1..].iter().any(|&d| !g.is_adjacent(c, d)) {
            return true;
        }
    }
    // R4: a -- c -> b, d -> c, d adjacent to a, d and b non-adjacent
    for c in (0..n).filter(|&c| c != b && g.has_undirected(a, c) && g.has_directed(c, b)) {
        if (0..n).any(|d| {
            d != a && d != b && g.has_directed(d, c) && g.is_adjacent(a, d) && !g.is_adjacent(d, b)
        }) {
            return true;
        }
    }
    false
}

/// Applies the four orientation rules to a fixed point. `allow(a, b)` vetoes
/// individual orientations `a -> b` (background knowledge). Returns the number
/// of edges oriented.
pub fn apply_meek_rules(g: &mut MixedGraph, allow: &dyn Fn(NodeId, NodeId) -> bool) -> usize {
    let mut oriented = 0;
    loop {
        let mut changed = false;
        for (x, y) in g.undirected_edges() {
            for (a, b) in [(x, y), (y, x)] {
                if g.has_undirected(a, b) && allow(a, b) && should_orient(g, a, b) {
                    g.add_directed(a, b);
                    oriented += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return oriented;
        }
    }
}

/// A DAG in the class represented by `pdag` (Dor–Tarsi): repeatedly remove a
/// sink whose undirected neighbours are adjacent to all its other neighbours,
/// orienting those edges into it.
pub fn consistent_extension(pdag: &MixedGraph) -> Result<MixedGraph> {
    let n = pdag.node_count();
    let mut work = pdag.clone();
    let mut out = pdag.clone();
    let mut alive = vec![true; n];
    for _ in 0..n {
        let candidate = (0..n).filter(|&x| alive[x]).find(|&x| {
            if !work.children(x).is_empty() {
                return false;
            }
            let neighbours = work.adjacent(x);
            work.undirected_neighbors(x)
                .into_iter()
                .all(|y| neighbours.iter().all(|&z| z == y || work.is_adjacent(y, z)))
        });
        let Some(x) = candidate else {
            return Err(Error::NotADag("pdag admits no consistent extension".into()));
        };
        for y in work.undirected_neighbors(x) {
            out.add_directed(y, x);
        }
        for y in work.adjacent(x) {
            work.remove_edge(x, y);
        }
        alive[x] = false;
    }
    Ok(out)
}
