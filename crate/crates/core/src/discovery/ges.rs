use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::orient_with_knowledge;
use crate::error::{Error, Result};
use crate::graph::{dag_to_cpdag, BackgroundKnowledge, MixedGraph, NodeId};
use crate::stats::{
    covariance_matrix, ols_fit, reciprocal_condition, submatrix, Dataset, SINGULAR_RCOND,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GesConfig {
    /// Scales the BIC complexity term.
    pub penalty_multiplier: f64,
    /// `None` for no bound on in-degree.
    pub max_parents: Option<usize>,
}

impl Default for GesConfig {
    fn default() -> Self {
        Self {
            penalty_multiplier: 1.0,
            max_parents: None,
        }
    }
}

impl GesConfig {
    fn validate(&self) -> Result<()> {
        if !(self.penalty_multiplier > 0.0 && self.penalty_multiplier.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty_multiplier must be positive, got {}",
                self.penalty_multiplier
            )));
        }
        Ok(())
    }
}

/// Residual variances below this floor are clamped before taking the log.
const VARIANCE_FLOOR: f64 = 1e-300;

fn gaussian_bic(n: usize, mle_variance: f64, parent_count: usize, penalty: f64) -> f64 {
    let nf = n as f64;
    let v = mle_variance.max(VARIANCE_FLOOR);
    -0.5 * nf * ((2.0 * PI * v).ln() + 1.0) - penalty * (parent_count as f64 + 2.0) / 2.0 * nf.ln()
}

/// Local BIC of `node` given `parents`: the maximised Gaussian
/// log-likelihood (residual variance `RSS / n`) minus
/// `penalty · (|parents| + 2) / 2 · ln n`. Higher is better.
pub fn bic_local_score(
    d: &Dataset,
    node: NodeId,
    parents: &[NodeId],
    cfg: &GesConfig,
) -> Result<f64> {
    cfg.validate()?;
    if parents.contains(&node) {
        return Err(Error::InvalidQuery(format!(
            "`{}` cannot be its own parent",
            d.name(node)
        )));
    }
    if let Some(m) = cfg.max_parents {
        if parents.len() > m {
            return Err(Error::InvalidQuery(format!(
                "{} parents exceed max_parents = {m}",
                parents.len()
            )));
        }
    }
    let fit = ols_fit(d, node, parents)?;
    Ok(gaussian_bic(
        d.nrows(),
        fit.rss / d.nrows() as f64,
        parents.len(),
        cfg.penalty_multiplier,
    ))
}

/// Cached local scores computed from the maximum-likelihood covariance.
pub struct BicScorer {
    cov: DMatrix<f64>,
    names: Vec<String>,
    n: usize,
    penalty: f64,
    cache: Mutex<HashMap<(NodeId, Vec<NodeId>), f64>>,
}

impl BicScorer {
    pub fn new(d: &Dataset, cfg: &GesConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cov: covariance_matrix(d, 0),
            names: d.names().to_vec(),
            n: d.nrows(),
            penalty: cfg.penalty_multiplier,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// `parents` must be sorted.
    pub fn local(&self, node: NodeId, parents: &[NodeId]) -> Result<f64> {
        let cache_key = (node, parents.to_vec());
        if let Some(&s) = self
            .cache
            .lock()
            .expect("score cache poisoned")
            .get(&cache_key)
        {
            return Ok(s);
        }
        let var = self.cov[(node, node)];
        let residual = if parents.is_empty() {
            var
        } else {
            let s = submatrix(&self.cov, parents, parents);
            let scale: Vec<f64> = (0..parents.len()).map(|i| s[(i, i)].sqrt()).collect();
            let rank_error = || Error::RankDeficiency {
                context: format!(
                    "{} ~ {}",
                    self.names[node],
                    parents
                        .iter()
                        .map(|&p| self.names[p].as_str())
                        .collect::<Vec<_>>()
                        .join(" + ")
                ),
            };
            if scale.iter().any(|&v| !(v > 0.0)) {
                return Err(rank_error());
            }
            let scaled = DMatrix::from_fn(parents.len(), parents.len(), |i, j| {
                s[(i, j)] / (scale[i] * scale[j])
            });
            if reciprocal_condition(&scaled) < SINGULAR_RCOND {
                return Err(rank_error());
            }
            let chol = s.cholesky().ok_or_else(rank_error)?;
            let cross = submatrix(&self.cov, parents, &[node]);
            let solved = chol.solve(&cross);
            var - (cross.transpose() * solved)[(0, 0)]
        };
        let score = gaussian_bic(self.n, residual, parents.len(), self.penalty);
        self.cache
            .lock()
            .expect("score cache poisoned")
            .insert(cache_key, score);
        Ok(score)
    }

    /// Decomposable score of a DAG: the sum of local scores.
    pub fn total(&self, dag: &MixedGraph) -> Result<f64> {
        (0..dag.node_count())
            .map(|v| self.local(v, &dag.parents(v)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    Add,
    Delete,
}

/// One accepted edit of the greedy search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GesMove {
    pub kind: MoveKind,
    pub from: NodeId,
    pub to: NodeId,
    /// Change in total score; positive for every accepted move.
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct GesOutcome {
    pub dag: MixedGraph,
    pub cpdag: MixedGraph,
    pub moves: Vec<GesMove>,
    pub score: f64,
}

/// Candidates within this relative margin count as ties and the first in
/// `(from, to)` order wins.
const TIE_TOLERANCE: f64 = 1e-9;

fn beats(candidate: f64, best: Option<f64>) -> bool {
    match best {
        None => true,
        Some(b) => candidate > b + TIE_TOLERANCE * b.abs().max(1.0),
    }
}

fn with(parents: &[NodeId], extra: NodeId) -> Vec<NodeId> {
    let mut out = parents.to_vec();
    out.push(extra);
    out.sort_unstable();
    out
}

fn without(parents: &[NodeId], gone: NodeId) -> Vec<NodeId> {
    parents.iter().copied().filter(|&v| v != gone).collect()
}

/// Greedy search over DAGs: a forward phase applying the best single edge
/// addition while it improves the score, then a backward phase applying the
/// best single deletion. Returns the final DAG, its CPDAG (with knowledge
/// orientations applied) and the accepted moves.
pub fn ges_search(d: &Dataset, k: &BackgroundKnowledge, cfg: &GesConfig) -> Result<GesOutcome> {
    let p = d.ncols();
    if p < 2 {
        return Err(Error::InvalidData(
            "discovery needs at least two columns".into(),
        ));
    }
    let scorer = BicScorer::new(d, cfg)?;
    let max_parents = cfg.max_parents.unwrap_or(usize::MAX);

    let mut dag = MixedGraph::new(d.names().to_vec());
    for (a, b) in k.required_edges() {
        dag.add_directed(a, b);
    }
    if dag.has_directed_cycle() {
        return Err(Error::KnowledgeConflict(
            "required edges form a cycle".into(),
        ));
    }
    let mut moves = Vec::new();

    loop {
        let mut best: Option<(f64, NodeId, NodeId)> = None;
        for to in 0..p {
            let parents = dag.parents(to);
            if parents.len() >= max_parents {
                continue;
            }
            let base = scorer.local(to, &parents)?;
            let reach_from_to = dag.descendants_of(to);
            for from in 0..p {
                if from == to || dag.is_adjacent(from, to) || !k.allows(from, to) {
                    continue;
                }
                if reach_from_to.contains(&from) {
                    continue;
                }
                let delta = scorer.local(to, &with(&parents, from))? - base;
                if beats(delta, best.map(|b| b.0))
                    || best.is_some_and(|b| tie_wins(delta, b, from, to))
                {
                    best = Some((delta, from, to));
                }
            }
        }
        match best {
            Some((delta, from, to)) if delta > 0.0 => {
                dag.add_directed(from, to);
                moves.push(GesMove {
                    kind: MoveKind::Add,
                    from,
                    to,
                    delta,
                });
            }
            _ => break,
        }
    }

    loop {
        let mut best: Option<(f64, NodeId, NodeId)> = None;
        for (from, to) in dag.directed_edges() {
            if k.is_required(from, to) {
                continue;
            }
            let parents = dag.parents(to);
            let delta = scorer.local(to, &without(&parents, from))? - scorer.local(to, &parents)?;
            if beats(delta, best.map(|b| b.0)) || best.is_some_and(|b| tie_wins(delta, b, from, to))
            {
                best = Some((delta, from, to));
            }
        }
        match best {
            Some((delta, from, to)) if delta > 0.0 => {
                dag.remove_edge(from, to);
                moves.push(GesMove {
                    kind: MoveKind::Delete,
                    from,
                    to,
                    delta,
                });
            }
            _ => break,
        }
    }

    let score = scorer.total(&dag)?;
    let mut cpdag = dag_to_cpdag(&dag)?;
    orient_with_knowledge(&mut cpdag, k);
    Ok(GesOutcome {
        dag,
        cpdag,
        moves,
        score,
    })
}

/// Within the tie margin the lexicographically smallest `(from, to)` wins.
fn tie_wins(delta: f64, best: (f64, NodeId, NodeId), from: NodeId, to: NodeId) -> bool {
    let (b, bf, bt) = best;
    let tied = (delta - b).abs() <= TIE_TOLERANCE * b.abs().max(1.0);
    tied && (from, to) < (bf, bt)
}

pub fn ges_discover(d: &Dataset, k: &BackgroundKnowledge, cfg: &GesConfig) -> Result<MixedGraph> {
    ges_search(d, k, cfg).map(|o| o.cpdag)
}
