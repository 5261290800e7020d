use crate::error::Result;
use crate::graph::{d_separated, MixedGraph, NodeId};
use crate::stats::FisherZ;

/// Conditional-independence decision used by the PC skeleton search.
pub trait IndependenceTest: Sync {
    fn independent(&self, a: NodeId, b: NodeId, conditioning: &[NodeId]) -> Result<bool>;
}

impl IndependenceTest for FisherZ {
    fn independent(&self, a: NodeId, b: NodeId, conditioning: &[NodeId]) -> Result<bool> {
        Ok(self.test(a, b, conditioning)?.independent)
    }
}

/// Perfect test: answers with d-separation in a known DAG.
#[derive(Debug, Clone, Copy)]
pub struct DSeparationOracle<'a> {
    dag: &'a MixedGraph,
}

impl<'a> DSeparationOracle<'a> {
    pub fn new(dag: &'a MixedGraph) -> Self {
        Self { dag }
    }
}

impl IndependenceTest for DSeparationOracle<'_> {
    fn independent(&self, a: NodeId, b: NodeId, conditioning: &[NodeId]) -> Result<bool> {
        Ok(d_separated(self.dag, a, b, conditioning))
    }
}
