use std::collections::{BTreeSet, VecDeque};

use super::{MixedGraph, NodeId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arrival {
    /// reached from a child, travelling against the edge
    FromChild,
    /// reached from a parent, travelling along the edge
    FromParent,
}

/// Whether `a` and `b` are d-separated by `conditioning` in the directed
/// part of `g`.
///
/// Reachability ("Bayes ball") over `(node, arrival direction)` states: a
/// chain or fork node blocks when conditioned on, a collider passes only when
/// it or one of its descendants is conditioned on.
pub fn d_separated(g: &MixedGraph, a: NodeId, b: NodeId, conditioning: &[NodeId]) -> bool {
    debug_assert_ne!(a, b, "d-separation needs two distinct nodes");
    debug_assert!(
        !conditioning.contains(&a) && !conditioning.contains(&b),
        "endpoints must not be conditioned on"
    );
    let z: BTreeSet<NodeId> = conditioning.iter().copied().collect();
    let z_ancestors = g.ancestors_of(conditioning);

    let n = g.node_count();
    let mut visited = vec![[false; 2]; n];
    let slot = |d: Arrival| match d {
        Arrival::FromChild => 0,
        Arrival::FromParent => 1,
    };
    let mut queue = VecDeque::from([(a, Arrival::FromChild)]);
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][slot(dir)] {
            continue;
        }
        visited[v][slot(dir)] = true;
        if v == b {
            return false;
        }
        let observed = z.contains(&v);
        match dir {
            Arrival::FromChild => {
                if !observed {
                    for u in g.parents(v) {
                        queue.push_back((u, Arrival::FromChild));
                    }
                    for w in g.children(v) {
                        queue.push_back((w, Arrival::FromParent));
                    }
                }
            }
            Arrival::FromParent => {
                if !observed {
                    for w in g.children(v) {
                        queue.push_back((w, Arrival::FromParent));
                    }
                }
                if z_ancestors.contains(&v) {
                    for u in g.parents(v) {
                        queue.push_back((u, Arrival::FromChild));
                    }
                }
            }
        }
    }
    true
}
