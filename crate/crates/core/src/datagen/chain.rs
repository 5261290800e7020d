use std::collections::BTreeMap;

use rand_distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use super::{check_n, normal_draws, stream, GeneratedBundle};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::scm::{Equation, LinearScm};
use crate::stats::Dataset;

pub const CHAIN_COLUMNS: [&str; 8] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "y"];

const X1: usize = 0;
const X2: usize = 1;
const X3: usize = 2;
const X4: usize = 3;
const X5: usize = 4;
const X6: usize = 5;
const X7: usize = 6;
const Y: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    /// Location and scale x3 is rescaled to when `rescale_x3` is set.
    pub x3: (f64, f64),
    pub p4: f64,
    pub p5: f64,
    pub x6: (f64, f64),
    pub x7: (f64, f64),
    pub rescale_x3: bool,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            x1: (50.0, 5.0),
            x2: (20.0, 1.0),
            x3: (45.0, 6.0),
            p4: 0.6,
            p5: 0.3,
            x6: (70.0, 5.0),
            x7: (50.0, 5.0),
            rescale_x3: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    /// `beta[0]` is both the x7 slope in x3 and the intercept of y.
    pub beta: [f64; 7],
    pub noise_sd_e1: f64,
    pub noise_sd_e2: f64,
    pub features: FeatureParams,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            seed: 0,
            beta: [0.4, 0.6, 0.4, 0.6, 0.7, 0.4, 0.4],
            noise_sd_e1: 1.0,
            noise_sd_e2: 2.0,
            features: FeatureParams::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        let f = &self.features;
        let sds = [
            self.noise_sd_e1,
            self.noise_sd_e2,
            f.x1.1,
            f.x2.1,
            f.x3.1,
            f.x6.1,
            f.x7.1,
        ];
        if !sds.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidConfig(
                "standard deviations must be positive".into(),
            ));
        }
        if ![f.p4, f.p5].iter().all(|p| *p > 0.0 && *p < 1.0) {
            return Err(Error::InvalidConfig(
                "probabilities must lie in (0, 1)".into(),
            ));
        }
        let means = [f.x1.0, f.x2.0, f.x3.0, f.x6.0, f.x7.0];
        if !self.beta.iter().chain(&means).all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig(
                "coefficients and means must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn bernoulli_draws(seed: u64, k: u64, p: f64, n: usize) -> Result<Vec<f64>> {
    let dist = Bernoulli::new(p).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = stream(seed, k);
    Ok((0..n)
        .map(|_| f64::from(u8::from(dist.sample(&mut rng))))
        .collect())
}

/// Seven independent features, `x3 = β0·x7 + e1` and
/// `y = β0 + β1·x1 + ... + β6·x6 + e2`.
///
/// Streams: x1 0, x2 1, e1 2, x4 3, x5 4, x6 5, x7 6, e2 7.
pub fn generate_chain_synthetic(cfg: &SynthConfig) -> Result<GeneratedBundle> {
    cfg.validate()?;
    let (n, seed, b, f) = (cfg.n, cfg.seed, &cfg.beta, &cfg.features);

    let x1 = normal_draws(seed, 0, f.x1.0, f.x1.1, n)?;
    let x2 = normal_draws(seed, 1, f.x2.0, f.x2.1, n)?;
    let e1 = normal_draws(seed, 2, 0.0, cfg.noise_sd_e1, n)?;
    let x4 = bernoulli_draws(seed, 3, f.p4, n)?;
    let x5 = bernoulli_draws(seed, 4, f.p5, n)?;
    let x6 = normal_draws(seed, 5, f.x6.0, f.x6.1, n)?;
    let x7 = normal_draws(seed, 6, f.x7.0, f.x7.1, n)?;
    let e2 = normal_draws(seed, 7, 0.0, cfg.noise_sd_e2, n)?;

    // x3 = a + s·(β0·x7 + e1), identity unless rescaling is on
    let (shift, scale) = if f.rescale_x3 {
        let mean = b[0] * f.x7.0;
        let sd = (b[0] * b[0] * f.x7.1 * f.x7.1 + cfg.noise_sd_e1 * cfg.noise_sd_e1).sqrt();
        let scale = f.x3.1 / sd;
        (f.x3.0 - scale * mean, scale)
    } else {
        (0.0, 1.0)
    };
    let x3: Vec<f64> = x7
        .iter()
        .zip(&e1)
        .map(|(x, e)| shift + scale * (b[0] * x + e))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            b[0] + b[1] * x1[i]
                + b[2] * x2[i]
                + b[3] * x3[i]
                + b[4] * x4[i]
                + b[5] * x5[i]
                + b[6] * x6[i]
                + e2[i]
        })
        .collect();

    let root = |mean: f64, var: f64| Equation::root(mean, var);
    let equations = vec![
        root(f.x1.0, f.x1.1 * f.x1.1),
        root(f.x2.0, f.x2.1 * f.x2.1),
        Equation {
            parents: vec![X7],
            coefficients: vec![scale * b[0]],
            intercept: shift,
            noise_variance: (scale * cfg.noise_sd_e1).powi(2),
        },
        root(f.p4, f.p4 * (1.0 - f.p4)),
        root(f.p5, f.p5 * (1.0 - f.p5)),
        root(f.x6.0, f.x6.1 * f.x6.1),
        root(f.x7.0, f.x7.1 * f.x7.1),
        Equation {
            parents: vec![X1, X2, X3, X4, X5, X6],
            coefficients: b[1..].to_vec(),
            intercept: b[0],
            noise_variance: cfg.noise_sd_e2 * cfg.noise_sd_e2,
        },
    ];
    let truth_scm = LinearScm::from_equations(CHAIN_COLUMNS, equations)?;
    let truth_dag = truth_scm.graph().clone();

    let centred = |xs: &[f64], m: f64| xs.iter().map(|x| x - m).collect::<Vec<_>>();
    let drawn_noise = BTreeMap::from([
        (X1, centred(&x1, f.x1.0)),
        (X2, centred(&x2, f.x2.0)),
        (X3, e1.iter().map(|e| scale * e).collect()),
        (X4, centred(&x4, f.p4)),
        (X5, centred(&x5, f.p5)),
        (X6, centred(&x6, f.x6.0)),
        (X7, centred(&x7, f.x7.0)),
        (Y, e2),
    ]);

    let dataset = Dataset::new(
        CHAIN_COLUMNS.iter().map(|s| s.to_string()).collect(),
        vec![x1, x2, x3, x4, x5, x6, x7, y],
    )?;
    Ok(GeneratedBundle {
        dataset,
        truth_dag,
        truth_scm,
        drawn_noise,
    })
}

/// Graph of the chain generator.
pub fn chain_truth_dag() -> MixedGraph {
    MixedGraph::dag_from_edges(
        CHAIN_COLUMNS,
        &[
            (X7, X3),
            (X1, Y),
            (X2, Y),
            (X3, Y),
            (X4, Y),
            (X5, Y),
            (X6, Y),
        ],
    )
    .expect("chain graph is acyclic")
}
