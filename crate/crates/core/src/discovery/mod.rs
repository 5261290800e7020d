//! Causal structure discovery: constraint-based PC and a greedy score-based
//! search, both honouring background knowledge and both returning a CPDAG.

mod ci;
mod ges;
mod pc;

pub use ci::{DSeparationOracle, IndependenceTest};
pub use ges::{
    bic_local_score, ges_discover, ges_search, BicScorer, GesConfig, GesMove, GesOutcome, MoveKind,
};
pub use pc::{pc_discover, pc_oracle, pc_search, pc_with_test, DepthLimit, PcConfig, PcOutcome};

use crate::graph::{apply_meek_rules, BackgroundKnowledge, MixedGraph};

/// Orients undirected edges that knowledge allows in one direction only, then
/// closes the graph under the orientation rules without ever producing a
/// forbidden edge.
pub(crate) fn orient_with_knowledge(g: &mut MixedGraph, k: &BackgroundKnowledge) {
    if !k.is_empty() {
        for (a, b) in g.undirected_edges() {
            match (k.allows(a, b), k.allows(b, a)) {
                (true, false) => g.add_directed(a, b),
                (false, true) => g.add_directed(b, a),
                _ => {}
            }
        }
    }
    apply_meek_rules(g, &|a, b| k.allows(a, b));
}
