use super::MixedGraph;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum PairStatus {
    Absent,
    Undirected,
    Forward,
    Backward,
}

fn status(g: &MixedGraph, a: usize, b: usize) -> PairStatus {
    if g.has_undirected(a, b) {
        PairStatus::Undirected
    } else if g.has_directed(a, b) {
        PairStatus::Forward
    } else if g.has_directed(b, a) {
        PairStatus::Backward
    } else {
        PairStatus::Absent
    }
}

/// Structural Hamming distance: the number of node pairs whose edge status
/// (absent, undirected, or directed one way) differs between the graphs.
pub fn shd(a: &MixedGraph, b: &MixedGraph) -> Result<usize> {
    if a.node_count() != b.node_count() {
        return Err(Error::SizeMismatch {
            left: a.node_count(),
            right: b.node_count(),
        });
    }
    let n = a.node_count();
    let mut distance = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if status(a, i, j) != status(b, i, j) {
                distance += 1;
            }
        }
    }
    Ok(distance)
}
