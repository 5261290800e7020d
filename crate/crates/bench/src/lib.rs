//! Fixtures shared by the criterion benches.

use causal_advisor_core::datagen::{generate_chain_synthetic, random_dag, SynthConfig};
use causal_advisor_core::graph::MixedGraph;
use causal_advisor_core::stats::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn chain_data(n: usize, seed: u64) -> Dataset {
    generate_chain_synthetic(&SynthConfig {
        n,
        seed,
        ..Default::default()
    })
    .expect("default config is valid")
    .dataset
}

pub fn random_dags(count: usize, p: usize, prob: f64, seed: u64) -> Vec<MixedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_dag(p, prob, &mut rng).expect("probability in range"))
        .collect()
}
