//! Seeded synthetic generators returning data with their ground truth.
//!
//! Every column draws from its own ChaCha8 stream: the generator is seeded
//! with `seed_from_u64(seed)` and column `k` uses `set_stream(k)`, so a column
//! never depends on how many values other columns consumed.

mod chain;
mod random;
mod student;

pub use chain::{
    chain_truth_dag, generate_chain_synthetic, FeatureParams, SynthConfig, CHAIN_COLUMNS,
};
pub use random::{random_dag, random_linear_scm, sample_linear_scm};
pub use student::{
    at_risk_observation, generate_student_surrogate, student_reference_scm, student_truth_dag,
    SurrogateConfig, STUDENT_COLUMNS,
};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, NodeId};
use crate::scm::LinearScm;
use crate::stats::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBundle {
    pub dataset: Dataset,
    pub truth_dag: MixedGraph,
    pub truth_scm: LinearScm,
    /// Exogenous term of each node as drawn, keyed by node.
    pub drawn_noise: BTreeMap<NodeId, Vec<f64>>,
}

pub(crate) fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

pub(crate) fn normal_draws(seed: u64, k: u64, mean: f64, sd: f64, n: usize) -> Result<Vec<f64>> {
    let dist = Normal::new(mean, sd)
        .map_err(|e| Error::InvalidConfig(format!("normal({mean}, {sd}): {e}")))?;
    let mut rng = stream(seed, k);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "sample size must be at least 1".into(),
        ));
    }
    Ok(())
}
