use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Equation, LinearScm};
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Observed node values for one individual.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: BTreeMap<NodeId, f64>,
}

impl Observation {
    /// Observation covering every node, in node order.
    pub fn full(values: &[f64]) -> Self {
        Self {
            values: values.iter().copied().enumerate().collect(),
        }
    }

    pub fn get(&self, v: NodeId) -> Option<f64> {
        self.values.get(&v).copied()
    }

    /// Named values resolved against the model's nodes.
    pub fn from_named(scm: &LinearScm, named: &BTreeMap<String, f64>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (name, &v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidData(format!("non-finite value for `{name}`")));
            }
            values.insert(scm.index_of(name)?, v);
        }
        Ok(Self { values })
    }

    fn require(&self, scm: &LinearScm, v: NodeId) -> Result<f64> {
        self.get(v)
            .ok_or_else(|| Error::MissingValue(scm.label(v).to_string()))
    }

    fn dense(&self, scm: &LinearScm) -> Result<Vec<f64>> {
        (0..scm.node_count())
            .map(|v| self.require(scm, v))
            .collect()
    }
}

/// do-assignments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub assignments: BTreeMap<NodeId, f64>,
}

impl Intervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(assignments: impl IntoIterator<Item = (NodeId, f64)>) -> Self {
        Self {
            assignments: assignments.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, v: NodeId) -> Option<f64> {
        self.assignments.get(&v).copied()
    }

    pub fn from_named(scm: &LinearScm, named: &BTreeMap<String, f64>) -> Result<Self> {
        let mut assignments = BTreeMap::new();
        for (name, &v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidData(format!(
                    "non-finite do-value for `{name}`"
                )));
            }
            assignments.insert(scm.index_of(name)?, v);
        }
        Ok(Self { assignments })
    }

    fn validate(&self, scm: &LinearScm) -> Result<()> {
        for (&v, &x) in &self.assignments {
            if v >= scm.node_count() {
                return Err(Error::UnknownNode(v.to_string()));
            }
            if !x.is_finite() {
                return Err(Error::InvalidData(format!(
                    "non-finite do-value for `{}`",
                    scm.label(v)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualResult {
    /// Noise of every non-intervened node.
    pub abducted_noise: BTreeMap<NodeId, f64>,
    /// Value of every node, indexed by node.
    pub counterfactual_values: Vec<f64>,
    pub intervened: BTreeSet<NodeId>,
}

impl CounterfactualResult {
    pub fn value(&self, v: NodeId) -> f64 {
        self.counterfactual_values[v]
    }
}

/// Noise of each requested node: the observed value minus the structural part
/// evaluated at the observed parents.
pub fn abduct_noise(
    scm: &LinearScm,
    obs: &Observation,
    nodes: &[NodeId],
) -> Result<BTreeMap<NodeId, f64>> {
    let mut out = BTreeMap::new();
    for &v in nodes {
        if v >= scm.node_count() {
            return Err(Error::UnknownNode(v.to_string()));
        }
        let eq = scm.equation(v);
        let mut structural = eq.intercept;
        for (&p, c) in eq.parents.iter().zip(&eq.coefficients) {
            structural += c * obs.require(scm, p)?;
        }
        out.insert(v, obs.require(scm, v)? - structural);
    }
    Ok(out)
}

/// Mutilated model: every intervened node loses its incoming edges and
/// becomes the constant do-value.
pub fn intervene(scm: &LinearScm, i: &Intervention) -> Result<LinearScm> {
    i.validate(scm)?;
    let mut graph = scm.graph().clone();
    let mut equations = scm.equations().to_vec();
    for (&v, &x) in &i.assignments {
        for p in graph.parents(v) {
            graph.remove_edge(p, v);
        }
        equations[v] = Equation::constant(x);
    }
    LinearScm::new(graph, equations)
}

/// Abduction, action, prediction: fixes each non-intervened node's noise at
/// its abducted value and re-propagates under the intervention.
pub fn counterfactual(
    scm: &LinearScm,
    obs: &Observation,
    i: &Intervention,
) -> Result<CounterfactualResult> {
    i.validate(scm)?;
    obs.dense(scm)?;
    let free: Vec<NodeId> = (0..scm.node_count())
        .filter(|v| !i.assignments.contains_key(v))
        .collect();
    let abducted_noise = abduct_noise(scm, obs, &free)?;
    let mut values = vec![0.0; scm.node_count()];
    for &v in scm.topological_order() {
        values[v] = match i.get(v) {
            Some(x) => x,
            None => scm.equation(v).structural_value(&values) + abducted_noise[&v],
        };
    }
    Ok(CounterfactualResult {
        abducted_noise,
        counterfactual_values: values,
        intervened: i.assignments.keys().copied().collect(),
    })
}

/// Total effect of a unit change of `source` on `target` in `scm`, summing
/// coefficient products along every directed path.
pub fn composite_effect(scm: &LinearScm, source: NodeId, target: NodeId) -> f64 {
    let mut grad = vec![0.0; scm.node_count()];
    grad[source] = 1.0;
    for &v in scm.topological_order() {
        if v == source {
            continue;
        }
        let eq = scm.equation(v);
        grad[v] = eq
            .parents
            .iter()
            .zip(&eq.coefficients)
            .map(|(&p, c)| c * grad[p])
            .sum();
    }
    grad[target]
}

/// Composite coefficients below this magnitude count as no effect.
const ZERO_EFFECT: f64 = 1e-12;

fn pinned(obs: &Observation, scm: &LinearScm, nodes: &[NodeId]) -> Result<Intervention> {
    nodes
        .iter()
        .map(|&v| Ok((v, obs.require(scm, v)?)))
        .collect::<Result<BTreeMap<_, _>>>()
        .map(|assignments| Intervention { assignments })
}

/// do-value for `free` that brings `target` to `target_value` while `held`
/// stays pinned at its observed values.
pub fn solve_required_intervention(
    scm: &LinearScm,
    obs: &Observation,
    target: NodeId,
    target_value: f64,
    free: NodeId,
    held: &[NodeId],
) -> Result<f64> {
    if held.contains(&free) {
        return Err(Error::InvalidQuery(format!(
            "`{}` cannot be both free and held",
            scm.label(free)
        )));
    }
    if free == target || held.contains(&target) {
        return Err(Error::InvalidQuery(
            "the target cannot be intervened on".into(),
        ));
    }
    let mut nodes = held.to_vec();
    nodes.push(free);
    let base = pinned(obs, scm, &nodes)?;
    let mutilated = intervene(scm, &base)?;
    let slope = composite_effect(&mutilated, free, target);
    if slope.abs() < ZERO_EFFECT {
        return Err(Error::ZeroEffect {
            from: scm.label(free).to_string(),
            to: scm.label(target).to_string(),
        });
    }
    let baseline = counterfactual(scm, obs, &base)?.value(target);
    Ok(obs.require(scm, free)? + (target_value - baseline) / slope)
}

/// How recommendations treat the actionable nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendMode {
    /// Intervene on every actionable node at once, severing their parents.
    #[default]
    AllActionable,
    /// Intervene on the single actionable node needing the smallest change;
    /// its effect flows through non-intervened mediators.
    SingleNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub intervention: Intervention,
    /// do-value minus observed value, per intervened node.
    pub delta: BTreeMap<NodeId, f64>,
    pub predicted_outcome: f64,
    pub norm_of_change: f64,
}

/// Least-norm change of the actionable nodes bringing `target` up to
/// `threshold`. With all actionable nodes pinned the outcome is affine in the
/// changes with composite coefficients `c`, so the minimiser is
/// `Δ = gap · c / ‖c‖²`. An observation already at or above the threshold gets
/// the empty intervention.
pub fn recommend(
    scm: &LinearScm,
    obs: &Observation,
    target: NodeId,
    threshold: f64,
    actionable: &[NodeId],
    mode: RecommendMode,
) -> Result<Recommendation> {
    if actionable.is_empty() {
        return Err(Error::InvalidQuery("no actionable nodes given".into()));
    }
    if target >= scm.node_count() {
        return Err(Error::UnknownNode(target.to_string()));
    }
    if actionable.contains(&target) {
        return Err(Error::InvalidQuery(
            "the target cannot be actionable".into(),
        ));
    }
    let observed = obs.require(scm, target)?;
    if observed >= threshold {
        return Ok(Recommendation {
            intervention: Intervention::none(),
            delta: BTreeMap::new(),
            predicted_outcome: counterfactual(scm, obs, &Intervention::none())?.value(target),
            norm_of_change: 0.0,
        });
    }
    let mut actionable = actionable.to_vec();
    actionable.sort_unstable();
    actionable.dedup();
    let zero_effect = || Error::ZeroEffect {
        from: actionable
            .iter()
            .map(|&v| scm.label(v))
            .collect::<Vec<_>>()
            .join(","),
        to: scm.label(target).to_string(),
    };

    let delta: BTreeMap<NodeId, f64> = match mode {
        RecommendMode::AllActionable => {
            let base = pinned(obs, scm, &actionable)?;
            let mutilated = intervene(scm, &base)?;
            let coeffs: Vec<f64> = actionable
                .iter()
                .map(|&v| composite_effect(&mutilated, v, target))
                .collect();
            let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
            if norm2.sqrt() < ZERO_EFFECT {
                return Err(zero_effect());
            }
            let gap = threshold - counterfactual(scm, obs, &base)?.value(target);
            actionable
                .iter()
                .zip(&coeffs)
                .map(|(&v, c)| (v, gap * c / norm2))
                .collect()
        }
        RecommendMode::SingleNode => {
            let mut best: Option<(NodeId, f64)> = None;
            for &v in &actionable {
                let x = match solve_required_intervention(scm, obs, target, threshold, v, &[]) {
                    Ok(x) => x,
                    Err(Error::ZeroEffect { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let change = x - obs.require(scm, v)?;
                if best.is_none_or(|(_, b)| change.abs() < b.abs()) {
                    best = Some((v, change));
                }
            }
            let (v, change) = best.ok_or_else(zero_effect)?;
            BTreeMap::from([(v, change)])
        }
    };

    let mut assignments = BTreeMap::new();
    for (&v, &d) in &delta {
        assignments.insert(v, obs.require(scm, v)? + d);
    }
    let intervention = Intervention { assignments };
    let predicted_outcome = counterfactual(scm, obs, &intervention)?.value(target);
    let norm_of_change = delta.values().map(|d| d * d).sum::<f64>().sqrt();
    Ok(Recommendation {
        intervention,
        delta,
        predicted_outcome,
        norm_of_change,
    })
}

/// [`recommend`] in the default mode, returning only the intervention.
pub fn recommend_min_change(
    scm: &LinearScm,
    obs: &Observation,
    target: NodeId,
    threshold: f64,
    actionable: &[NodeId],
) -> Result<Intervention> {
    recommend(
        scm,
        obs,
        target,
        threshold,
        actionable,
        RecommendMode::default(),
    )
    .map(|r| r.intervention)
}
