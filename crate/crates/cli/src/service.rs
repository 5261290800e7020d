//! HTTP/JSON facade over a fitted SCM and a table of observations.
//!
//! All model work is in the SCM's units (z-scores when the model was fitted
//! on normalized data); every response also carries raw values obtained via
//! the inverse normalization.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use causal_advisor_core::graph::{GraphJson, NodeId};
use causal_advisor_core::scm::{
    counterfactual, recommend, Intervention, LinearScm, Observation, RecommendMode, ScmJson,
};
use causal_advisor_core::stats::{Dataset, NormalizationRecord};
use causal_advisor_core::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub const DEFAULT_THRESHOLD_Z: f64 = -0.901;
pub const PASS_TOLERANCE: f64 = 1e-9;

/// Everything a request may read. Built once at startup, never mutated.
#[derive(Debug, Clone)]
pub struct SessionState {
    scm: LinearScm,
    /// Observations in model units, one value per SCM node.
    rows: Vec<Vec<f64>>,
    /// Aligned with the SCM nodes.
    normalization: NormalizationRecord,
    target: NodeId,
    actionable: Vec<NodeId>,
    threshold_z: f64,
}

/// Empty until the session has loaded; requests get 503 meanwhile.
pub type SharedState = Arc<OnceLock<SessionState>>;

/// Default outcome: the last childless node in topological order.
pub fn default_target(scm: &LinearScm) -> NodeId {
    let g = scm.graph();
    *scm.topological_order()
        .iter()
        .rev()
        .find(|&&v| g.children(v).is_empty())
        .expect("a DAG has a sink")
}

/// Rows of `d` in SCM node order, converted to model units with `norm`.
pub fn model_rows(
    scm: &LinearScm,
    d: &Dataset,
    norm: Option<&NormalizationRecord>,
) -> Result<Vec<Vec<f64>>, Error> {
    let cols = scm
        .labels()
        .iter()
        .map(|name| {
            d.index_of(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let aligned = d.select(&cols)?;
    let aligned = match norm {
        Some(rec) => rec.apply(&aligned)?,
        None => aligned,
    };
    Ok((0..aligned.nrows()).map(|i| aligned.row(i)).collect())
}

impl SessionState {
    pub fn new(
        scm: LinearScm,
        rows: Vec<Vec<f64>>,
        normalization: Option<&NormalizationRecord>,
        target: Option<&str>,
        actionable: Option<&[String]>,
        threshold_z: f64,
    ) -> Result<Self, Error> {
        let p = scm.node_count();
        if let Some(i) = rows
            .iter()
            .position(|r| r.len() != p || !r.iter().all(|v| v.is_finite()))
        {
            return Err(Error::InvalidData(format!(
                "observation {i} is not {p} finite values"
            )));
        }
        if !threshold_z.is_finite() {
            return Err(Error::InvalidConfig("threshold must be finite".into()));
        }
        let normalization = match normalization {
            Some(rec) => {
                rec.validate()?;
                let mut aligned = NormalizationRecord::identity(scm.labels().to_vec());
                for (v, name) in scm.labels().iter().enumerate() {
                    let j = rec
                        .index_of(name)
                        .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
                    aligned.means[v] = rec.means[j];
                    aligned.stds[v] = rec.stds[j];
                }
                aligned
            }
            None => NormalizationRecord::identity(scm.labels().to_vec()),
        };
        let target = match target {
            Some(name) => scm.index_of(name)?,
            None => default_target(&scm),
        };
        let actionable = match actionable {
            Some(names) => {
                let ids = resolve(&scm, names)?;
                if ids.is_empty() {
                    return Err(Error::InvalidQuery("no actionable nodes given".into()));
                }
                if ids.contains(&target) {
                    return Err(Error::InvalidQuery(
                        "the target cannot be actionable".into(),
                    ));
                }
                ids
            }
            None => scm
                .graph()
                .ancestors_of(&[target])
                .into_iter()
                .filter(|&v| v != target)
                .collect(),
        };
        Ok(Self {
            scm,
            rows,
            normalization,
            target,
            actionable,
            threshold_z,
        })
    }

    /// Outcomes within [`PASS_TOLERANCE`] below the threshold count as
    /// reaching it, so a recommended change replays as passing.
    pub fn passes(&self, outcome: f64) -> bool {
        outcome >= self.threshold_z - PASS_TOLERANCE
    }

    pub fn threshold_raw(&self) -> f64 {
        self.normalization.to_raw(self.target, self.threshold_z)
    }

    fn named(&self, values: impl IntoIterator<Item = (NodeId, f64)>) -> BTreeMap<String, f64> {
        values
            .into_iter()
            .map(|(v, x)| (self.scm.label(v).to_string(), x))
            .collect()
    }

    fn named_raw(&self, values: impl IntoIterator<Item = (NodeId, f64)>) -> BTreeMap<String, f64> {
        values
            .into_iter()
            .map(|(v, x)| {
                (
                    self.scm.label(v).to_string(),
                    self.normalization.to_raw(v, x),
                )
            })
            .collect()
    }

    fn observation(
        &self,
        id: Option<usize>,
        values: Option<&BTreeMap<String, f64>>,
    ) -> Result<Observation, ApiError> {
        match (id, values) {
            (Some(i), None) => self
                .rows
                .get(i)
                .map(|r| Observation::full(r))
                .ok_or_else(|| ApiError::not_found(format!("no observation with id {i}"))),
            (None, Some(named)) => Ok(Observation::from_named(&self.scm, named)?),
            _ => Err(ApiError::bad_request(
                "give exactly one of `observation_id` and `values`",
            )),
        }
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            target: self.scm.label(self.target).to_string(),
            actionable: self
                .actionable
                .iter()
                .map(|&v| self.scm.label(v).to_string())
                .collect(),
            threshold_z: self.threshold_z,
            threshold_raw: self.threshold_raw(),
            observation_count: self.rows.len(),
        }
    }

    pub fn observations(&self) -> Vec<ObservationSummary> {
        self.rows
            .iter()
            .enumerate()
            .map(|(id, row)| {
                let outcome = row[self.target];
                ObservationSummary {
                    id,
                    values: self.named(row.iter().copied().enumerate()),
                    raw_values: self.named_raw(row.iter().copied().enumerate()),
                    outcome,
                    outcome_raw: self.normalization.to_raw(self.target, outcome),
                    passes: self.passes(outcome),
                }
            })
            .collect()
    }

    pub fn counterfactual(
        &self,
        req: &CounterfactualRequest,
    ) -> Result<CounterfactualResponse, ApiError> {
        let obs = self.observation(req.observation_id, req.values.as_ref())?;
        let i = Intervention::from_named(&self.scm, &req.interventions)?;
        let cf = counterfactual(&self.scm, &obs, &i)?;
        let outcome = cf.value(self.target);
        let values = || cf.counterfactual_values.iter().copied().enumerate();
        Ok(CounterfactualResponse {
            counterfactual_values: self.named(values()),
            counterfactual_raw: self.named_raw(values()),
            outcome,
            outcome_raw: self.normalization.to_raw(self.target, outcome),
            passes: self.passes(outcome),
            abducted_noise: self.named(cf.abducted_noise.iter().map(|(&v, &u)| (v, u))),
        })
    }

    pub fn recommend(&self, req: &RecommendRequest) -> Result<RecommendResponse, ApiError> {
        let obs = self.observation(req.observation_id, req.values.as_ref())?;
        let actionable = match &req.actionable {
            Some(names) => resolve(&self.scm, names)?,
            None => self.actionable.clone(),
        };
        if actionable.is_empty() {
            return Err(ApiError::bad_request("`actionable` must not be empty"));
        }
        let mode = req.mode.unwrap_or_default();
        let r = recommend(
            &self.scm,
            &obs,
            self.target,
            self.threshold_z,
            &actionable,
            mode,
        )?;
        let assignments = || r.intervention.assignments.iter().map(|(&v, &x)| (v, x));
        Ok(RecommendResponse {
            intervention: self.named(assignments()),
            intervention_raw: self.named_raw(assignments()),
            delta: self.named(r.delta.iter().map(|(&v, &d)| (v, d))),
            predicted_outcome: r.predicted_outcome,
            predicted_outcome_raw: self.normalization.to_raw(self.target, r.predicted_outcome),
            norm_of_change: r.norm_of_change,
            passes: self.passes(r.predicted_outcome),
            mode,
        })
    }
}

fn resolve(scm: &LinearScm, names: &[String]) -> Result<Vec<NodeId>, Error> {
    let mut ids = Vec::with_capacity(names.len());
    for name in names {
        let v = scm.index_of(name)?;
        if !ids.contains(&v) {
            ids.push(v);
        }
    }
    Ok(ids)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub target: String,
    pub actionable: Vec<String>,
    pub threshold_z: f64,
    pub threshold_raw: f64,
    pub observation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSummary {
    pub id: usize,
    pub values: BTreeMap<String, f64>,
    pub raw_values: BTreeMap<String, f64>,
    pub outcome: f64,
    pub outcome_raw: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterfactualRequest {
    #[serde(default)]
    pub observation_id: Option<usize>,
    #[serde(default)]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub interventions: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualResponse {
    pub counterfactual_values: BTreeMap<String, f64>,
    pub counterfactual_raw: BTreeMap<String, f64>,
    pub outcome: f64,
    pub outcome_raw: f64,
    pub passes: bool,
    pub abducted_noise: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendRequest {
    #[serde(default)]
    pub observation_id: Option<usize>,
    #[serde(default)]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub actionable: Option<Vec<String>>,
    #[serde(default)]
    pub mode: Option<RecommendMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub intervention: BTreeMap<String, f64>,
    pub intervention_raw: BTreeMap<String, f64>,
    pub delta: BTreeMap<String, f64>,
    pub predicted_outcome: f64,
    pub predicted_outcome_raw: f64,
    pub norm_of_change: f64,
    pub passes: bool,
    pub mode: RecommendMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: String,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: "bad_request".into(),
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            kind: "not_found".into(),
            message: message.into(),
        }
    }

    fn unavailable() -> Self {
        Self {
            status: StatusCode::SERVICE_UNAVAILABLE,
            kind: "not_initialized".into(),
            message: "the session is still loading".into(),
        }
    }

    pub fn status(&self) -> StatusCode {
        self.status
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::ZeroEffect { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ if e.is_numerical() => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let message = match &e {
            Error::ZeroEffect { .. } => format!(
                "{e}: none of the actionable nodes has a causal path to the outcome, so no change to them can move it"
            ),
            _ => e.to_string(),
        };
        Self {
            status,
            kind: e.kind().into(),
            message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.kind,
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

fn session(state: &SharedState) -> Result<&SessionState, ApiError> {
    state.get().ok_or_else(ApiError::unavailable)
}

/// Malformed bodies are client errors (400), including numbers outside the
/// finite range.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

async fn get_graph(State(state): State<SharedState>) -> Result<Json<GraphJson>, ApiError> {
    Ok(Json(session(&state)?.scm.graph().to_json()))
}

async fn get_model(State(state): State<SharedState>) -> Result<Json<ScmJson>, ApiError> {
    Ok(Json(session(&state)?.scm.to_json()))
}

async fn get_session(State(state): State<SharedState>) -> Result<Json<SessionInfo>, ApiError> {
    Ok(Json(session(&state)?.info()))
}

async fn get_observations(
    State(state): State<SharedState>,
) -> Result<Json<Vec<ObservationSummary>>, ApiError> {
    Ok(Json(session(&state)?.observations()))
}

async fn post_counterfactual(
    State(state): State<SharedState>,
    body: Bytes,
) -> Result<Json<CounterfactualResponse>, ApiError> {
    let s = session(&state)?;
    Ok(Json(s.counterfactual(&parse_body(&body)?)?))
}

async fn post_recommend(
    State(state): State<SharedState>,
    body: Bytes,
) -> Result<Json<RecommendResponse>, ApiError> {
    let s = session(&state)?;
    Ok(Json(s.recommend(&parse_body(&body)?)?))
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/graph", get(get_graph))
        .route("/api/model", get(get_model))
        .route("/api/session", get(get_session))
        .route("/api/observations", get(get_observations))
        .route("/api/counterfactual", post(post_counterfactual))
        .route("/api/recommend", post(post_recommend))
        .layer(CorsLayer::permissive())
        .with_state(state)
}
