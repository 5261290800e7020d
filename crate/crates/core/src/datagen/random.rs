use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_n, normal_draws, GeneratedBundle};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::scm::{Equation, LinearScm};
use crate::stats::Dataset;

/// Erdős–Rényi DAG over a random causal order. Nodes are named `X0..`.
pub fn random_dag<R: Rng + ?Sized>(p: usize, edge_prob: f64, rng: &mut R) -> Result<MixedGraph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidConfig(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut g = MixedGraph::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random_bool(edge_prob) {
                g.add_directed(order[i], order[j]);
            }
        }
    }
    Ok(g)
}

/// Coefficients of magnitude U(0.5, 1.5) with random sign, zero intercepts
/// and noise variances U(0.5, 1.5).
pub fn random_linear_scm<R: Rng + ?Sized>(dag: &MixedGraph, rng: &mut R) -> Result<LinearScm> {
    let equations = (0..dag.node_count())
        .map(|v| {
            let parents = dag.parents(v);
            let coefficients = parents
                .iter()
                .map(|_| {
                    let m = rng.random_range(0.5..1.5);
                    if rng.random_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                })
                .collect();
            Equation {
                parents,
                coefficients,
                intercept: 0.0,
                noise_variance: rng.random_range(0.5..1.5),
            }
        })
        .collect();
    LinearScm::new(dag.clone(), equations)
}

/// `n` rows from `scm` with Gaussian noise, node `k` drawing from stream `k`.
pub fn sample_linear_scm(scm: &LinearScm, n: usize, seed: u64) -> Result<GeneratedBundle> {
    check_n(n)?;
    let p = scm.node_count();
    let noise: Vec<Vec<f64>> = (0..p)
        .map(|v| {
            let sd = scm.equation(v).noise_variance.sqrt();
            if sd == 0.0 {
                Ok(vec![0.0; n])
            } else {
                normal_draws(seed, v as u64, 0.0, sd, n)
            }
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![Vec::with_capacity(n); p];
    let mut row = vec![0.0; p];
    for i in 0..n {
        for (r, col) in row.iter_mut().zip(&noise) {
            *r = col[i];
        }
        for (v, x) in scm.propagate(&row).into_iter().enumerate() {
            columns[v].push(x);
        }
    }
    let dataset = Dataset::new(scm.labels().to_vec(), columns)?;
    Ok(GeneratedBundle {
        dataset,
        truth_dag: scm.graph().clone(),
        truth_scm: scm.clone(),
        drawn_noise: noise.into_iter().enumerate().collect::<BTreeMap<_, _>>(),
    })
}
