use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_n, normal_draws, GeneratedBundle};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::scm::{Equation, LinearScm, Observation};
use crate::stats::Dataset;

pub const STUDENT_COLUMNS: [&str; 4] = ["node13", "node16", "node34", "node39"];

const N13: usize = 0;
const N16: usize = 1;
const N34: usize = 2;
const N39: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateConfig {
    pub n: usize,
    pub seed: u64,
    /// Outcome coefficients on node16, node13 and node34.
    pub outcome_coefficients: (f64, f64, f64),
    /// Coefficients of node13 -> node16 and node34 -> node16.
    pub confounder_strengths: (f64, f64),
    pub pass_threshold_z: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            seed: 0,
            outcome_coefficients: (0.19, 0.486, 0.187),
            confounder_strengths: (0.8, 0.1),
            pass_threshold_z: -0.901,
        }
    }
}

impl SurrogateConfig {
    /// Noise variances of node16 and node39 giving both unit variance.
    fn noise_variances(&self) -> Result<(f64, f64)> {
        let (s13, s34) = self.confounder_strengths;
        let (c16, c13, c34) = self.outcome_coefficients;
        let v16 = 1.0 - s13 * s13 - s34 * s34;
        let explained = c16 * c16 + c13 * c13 + c34 * c34 + 2.0 * c16 * (c13 * s13 + c34 * s34);
        let v39 = 1.0 - explained;
        if !(v16 > 0.0) || !(v39 > 0.0) {
            return Err(Error::InvalidConfig(
                "coefficients leave no room for unit-variance noise".into(),
            ));
        }
        Ok((v16, v39))
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        let (c16, c13, c34) = self.outcome_coefficients;
        let (s13, s34) = self.confounder_strengths;
        if ![c16, c13, c34, s13, s34, self.pass_threshold_z]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidConfig(
                "surrogate parameters must be finite".into(),
            ));
        }
        self.noise_variances().map(|_| ())
    }
}

pub fn student_truth_dag() -> MixedGraph {
    MixedGraph::dag_from_edges(
        STUDENT_COLUMNS,
        &[(N13, N16), (N34, N16), (N13, N39), (N34, N39), (N16, N39)],
    )
    .expect("student graph is acyclic")
}

/// Four z-scored nodes: independent standard-normal node13 and node34, node16
/// driven by both, and the outcome node39 driven by all three.
///
/// Streams: node13 0, node34 1, node16 noise 2, node39 noise 3.
pub fn generate_student_surrogate(cfg: &SurrogateConfig) -> Result<GeneratedBundle> {
    cfg.validate()?;
    let (v16, v39) = cfg.noise_variances()?;
    let (s13, s34) = cfg.confounder_strengths;
    let (c16, c13, c34) = cfg.outcome_coefficients;
    let (n, seed) = (cfg.n, cfg.seed);

    let x13 = normal_draws(seed, 0, 0.0, 1.0, n)?;
    let x34 = normal_draws(seed, 1, 0.0, 1.0, n)?;
    let e16 = normal_draws(seed, 2, 0.0, v16.sqrt(), n)?;
    let u1 = normal_draws(seed, 3, 0.0, v39.sqrt(), n)?;
    let x16: Vec<f64> = (0..n)
        .map(|i| s13 * x13[i] + s34 * x34[i] + e16[i])
        .collect();
    let x39: Vec<f64> = (0..n)
        .map(|i| c16 * x16[i] + c13 * x13[i] + c34 * x34[i] + u1[i])
        .collect();

    let equations = vec![
        Equation::root(0.0, 1.0),
        Equation {
            parents: vec![N13, N34],
            coefficients: vec![s13, s34],
            intercept: 0.0,
            noise_variance: v16,
        },
        Equation::root(0.0, 1.0),
        Equation {
            parents: vec![N16, N13, N34],
            coefficients: vec![c16, c13, c34],
            intercept: 0.0,
            noise_variance: v39,
        },
    ];
    let truth_scm = LinearScm::from_equations(STUDENT_COLUMNS, equations)?;
    let drawn_noise = BTreeMap::from([
        (N13, x13.clone()),
        (N16, e16),
        (N34, x34.clone()),
        (N39, u1),
    ]);
    let dataset = Dataset::new(
        STUDENT_COLUMNS.iter().map(|s| s.to_string()).collect(),
        vec![x13, x16, x34, x39],
    )?;
    Ok(GeneratedBundle {
        dataset,
        truth_dag: truth_scm.graph().clone(),
        truth_scm,
        drawn_noise,
    })
}

/// Outcome model alone: node39 on node16, node13 and node34 with the given
/// coefficients and zero intercept, the three inputs as unit-variance roots.
pub fn student_reference_scm(outcome_coefficients: (f64, f64, f64)) -> LinearScm {
    let (c16, c13, c34) = outcome_coefficients;
    let equations = vec![
        Equation::root(0.0, 1.0),
        Equation::root(0.0, 1.0),
        Equation::root(0.0, 1.0),
        Equation {
            parents: vec![N16, N13, N34],
            coefficients: vec![c16, c13, c34],
            intercept: 0.0,
            noise_variance: 1.0 - c16 * c16 - c13 * c13 - c34 * c34,
        },
    ];
    LinearScm::from_equations(STUDENT_COLUMNS, equations).expect("reference model is valid")
}

/// The at-risk student row: node13 0.06, node16 -2.57, node34 -0.365, node39 -1.29.
pub fn at_risk_observation() -> Observation {
    Observation::full(&[0.06, -2.57, -0.365, -1.29])
}
