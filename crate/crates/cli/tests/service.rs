use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use causal_advisor_cli::service::{
    router, CounterfactualRequest, RecommendRequest, SessionState, SharedState,
};
use causal_advisor_core::datagen::{
    generate_student_surrogate, student_reference_scm, SurrogateConfig,
};
use causal_advisor_core::graph::GraphJson;
use causal_advisor_core::scm::{fit_linear_scm, Equation, LinearScm, ScmJson};
use causal_advisor_core::stats::NormalizationRecord;
use http_body_util::BodyExt;
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

const AT_RISK: [f64; 4] = [0.06, -2.57, -0.365, -1.29];
const PASSING: [f64; 4] = [0.5, 0.2, 0.1, 0.3];

fn reference_session(rows: Vec<Vec<f64>>, norm: Option<&NormalizationRecord>) -> SessionState {
    let scm = student_reference_scm((0.19, 0.486, 0.187));
    SessionState::new(scm, rows, norm, None, None, -0.901).unwrap()
}

fn app(session: SessionState) -> Router {
    let state: SharedState = Arc::new(OnceLock::new());
    state.set(session).unwrap();
    router(state)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body.map(|b| b.to_string())).await;
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

async fn call_raw(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<String>,
) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

#[tokio::test]
async fn uninitialized_service_is_unavailable() {
    let app = router(Arc::new(OnceLock::new()));
    for (method, uri) in [
        ("GET", "/api/graph"),
        ("GET", "/api/model"),
        ("GET", "/api/observations"),
        ("POST", "/api/counterfactual"),
        ("POST", "/api/recommend"),
    ] {
        let (status, body) = call(&app, method, uri, Some(json!({}))).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(body["error"], "not_initialized");
    }
}

#[tokio::test]
async fn graph_model_and_observations() {
    let b = generate_student_surrogate(&SurrogateConfig {
        n: 200,
        seed: 0,
        ..Default::default()
    })
    .unwrap();
    let scm = fit_linear_scm(&b.dataset, &b.truth_dag).unwrap();
    let rows: Vec<Vec<f64>> = (0..200).map(|i| b.dataset.row(i)).collect();
    let app = app(SessionState::new(scm.clone(), rows, None, None, None, -0.901).unwrap());

    let (status, graph) = call(&app, "GET", "/api/graph", None).await;
    assert_eq!(status, StatusCode::OK);
    let graph: GraphJson = serde_json::from_value(graph).unwrap();
    assert_eq!(graph.directed.len(), 5);
    assert!(graph.undirected.is_empty());

    let (_, model) = call(&app, "GET", "/api/model", None).await;
    let model: ScmJson = serde_json::from_value(model).unwrap();
    assert_eq!(LinearScm::from_json(&model).unwrap(), scm);

    let (_, obs) = call(&app, "GET", "/api/observations", None).await;
    let obs = obs.as_array().unwrap();
    assert_eq!(obs.len(), 200);
    for (i, o) in obs.iter().enumerate() {
        let y = b.dataset.column(3)[i];
        assert_eq!(o["id"], i);
        assert_eq!(o["outcome"].as_f64().unwrap(), y);
        assert_eq!(o["passes"].as_bool().unwrap(), y >= -0.901);
    }

    let (_, info) = call(&app, "GET", "/api/session", None).await;
    assert_eq!(info["target"], "node39");
    assert_eq!(info["actionable"], json!(["node13", "node16", "node34"]));
}

#[tokio::test]
async fn empty_dataset_lists_no_observations() {
    let app = app(reference_session(vec![], None));
    let (status, body) = call(&app, "GET", "/api/observations", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
}

#[tokio::test]
async fn counterfactual_endpoint() {
    let app = app(reference_session(
        vec![AT_RISK.to_vec(), PASSING.to_vec()],
        None,
    ));

    let (status, body) = call(
        &app,
        "POST",
        "/api/counterfactual",
        Some(json!({"observation_id": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["outcome"].as_f64().unwrap(), -1.29);
    assert_eq!(body["passes"], false);
    assert!((body["abducted_noise"]["node39"].as_f64().unwrap() + 0.763).abs() < 5e-4);

    let req = json!({"observation_id": 0, "interventions": {"node13": 0.861}});
    let (status, body) = call(&app, "POST", "/api/counterfactual", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["outcome"].as_f64().unwrap() + 0.901).abs() < 1e-3);
    assert_eq!(body["passes"], true);
    assert_eq!(
        body["counterfactual_values"]["node13"].as_f64().unwrap(),
        0.861
    );
    assert!(body["abducted_noise"].get("node13").is_none());

    // inline values give the same answer as the stored row
    let named: BTreeMap<&str, f64> = ["node13", "node16", "node34", "node39"]
        .into_iter()
        .zip(AT_RISK)
        .collect();
    let req = json!({"values": named, "interventions": {"node13": 0.861}});
    let (_, inline) = call(&app, "POST", "/api/counterfactual", Some(req)).await;
    assert_eq!(inline, body);
}

#[tokio::test]
async fn counterfactual_validation() {
    let app = app(reference_session(vec![AT_RISK.to_vec()], None));
    let cases = [
        (
            json!({"observation_id": 0, "interventions": {"zz": 1.0}}),
            StatusCode::BAD_REQUEST,
        ),
        (json!({"observation_id": 9}), StatusCode::NOT_FOUND),
        (json!({}), StatusCode::BAD_REQUEST),
        (
            json!({"observation_id": 0, "values": {"node13": 0.0}}),
            StatusCode::BAD_REQUEST,
        ),
        (json!({"values": {"node13": 0.0}}), StatusCode::BAD_REQUEST),
        (
            json!({"observation_id": 0, "bogus": 1}),
            StatusCode::BAD_REQUEST,
        ),
    ];
    for (req, expected) in cases {
        let (status, body) = call(&app, "POST", "/api/counterfactual", Some(req.clone())).await;
        assert_eq!(status, expected, "{req}");
        assert!(body["message"].is_string());
    }
    // JSON has no NaN; an overflowing literal is the closest non-finite input
    let (status, _) = call_raw(
        &app,
        "POST",
        "/api/counterfactual",
        Some(r#"{"observation_id": 0, "interventions": {"node13": 1e999}}"#.into()),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_raw(
        &app,
        "POST",
        "/api/counterfactual",
        Some("{not json".into()),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn recommend_endpoint() {
    let app = app(reference_session(
        vec![AT_RISK.to_vec(), PASSING.to_vec()],
        None,
    ));
    let req = json!({"observation_id": 0, "actionable": ["node13", "node16", "node34"]});
    let (status, rec) = call(&app, "POST", "/api/recommend", Some(req.clone())).await;
    assert_eq!(status, StatusCode::OK);
    for (name, expected) in [
        ("node13", 0.61528),
        ("node16", 0.24054),
        ("node34", 0.23674),
    ] {
        assert!(
            (rec["delta"][name].as_f64().unwrap() - expected).abs() < 1e-4,
            "{name}"
        );
    }
    assert!((rec["predicted_outcome"].as_f64().unwrap() + 0.901).abs() < 1e-6);
    assert_eq!(rec["passes"], true);

    // replaying the recommendation passes
    let replay = json!({"observation_id": 0, "interventions": rec["intervention"]});
    let (_, cf) = call(&app, "POST", "/api/counterfactual", Some(replay)).await;
    assert_eq!(cf["passes"], true);
    assert!((cf["outcome"].as_f64().unwrap() + 0.901).abs() < 1e-6);

    // identical requests, identical bodies
    let (_, a) = call_raw(&app, "POST", "/api/recommend", Some(req.to_string())).await;
    let (_, b) = call_raw(&app, "POST", "/api/recommend", Some(req.to_string())).await;
    assert_eq!(a, b);

    // session default actionable set is used when omitted
    let (_, default) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 0})),
    )
    .await;
    assert_eq!(default["intervention"], rec["intervention"]);

    let single = json!({"observation_id": 0, "actionable": ["node13"], "mode": "single_node"});
    let (_, one) = call(&app, "POST", "/api/recommend", Some(single)).await;
    assert!((one["delta"]["node13"].as_f64().unwrap() - 0.80041).abs() < 1e-4);

    let (status, passing) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(passing["intervention"], json!({}));
    assert_eq!(passing["norm_of_change"].as_f64().unwrap(), 0.0);

    let (status, _) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 0, "actionable": []})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 5})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 0, "actionable": ["zz"]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn actionable_node_without_path_is_unprocessable() {
    // a -> y, b isolated
    let scm = LinearScm::from_equations(
        ["a", "b", "y"],
        vec![
            Equation::root(0.0, 1.0),
            Equation::root(0.0, 1.0),
            Equation {
                parents: vec![0],
                coefficients: vec![0.5],
                intercept: 0.0,
                noise_variance: 0.75,
            },
        ],
    )
    .unwrap();
    let session =
        SessionState::new(scm, vec![vec![0.0, 0.0, -2.0]], None, Some("y"), None, 0.0).unwrap();
    let app = app(session);
    let (status, body) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 0, "actionable": ["b"]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "zero_effect");
    assert!(body["message"].as_str().unwrap().contains("causal path"));
}

#[tokio::test]
async fn raw_units_follow_normalization() {
    let norm = NormalizationRecord {
        columns: vec![
            "node39".into(),
            "node13".into(),
            "node16".into(),
            "node34".into(),
        ],
        means: vec![60.0, 50.0, 55.0, 45.0],
        stds: vec![12.0, 10.0, 8.0, 9.0],
    };
    let app = app(reference_session(vec![AT_RISK.to_vec()], Some(&norm)));
    let (_, info) = call(&app, "GET", "/api/session", None).await;
    assert!((info["threshold_raw"].as_f64().unwrap() - (60.0 - 0.901 * 12.0)).abs() < 1e-12);
    let (_, obs) = call(&app, "GET", "/api/observations", None).await;
    assert!((obs[0]["raw_values"]["node13"].as_f64().unwrap() - 50.6).abs() < 1e-12);
    let req = json!({"observation_id": 0, "interventions": {"node13": 0.861}});
    let (_, cf) = call(&app, "POST", "/api/counterfactual", Some(req)).await;
    let z = cf["outcome"].as_f64().unwrap();
    assert!((cf["outcome_raw"].as_f64().unwrap() - (60.0 + 12.0 * z)).abs() < 1e-12);
    assert!((cf["counterfactual_raw"]["node13"].as_f64().unwrap() - 58.61).abs() < 1e-12);
    let (_, rec) = call(
        &app,
        "POST",
        "/api/recommend",
        Some(json!({"observation_id": 0})),
    )
    .await;
    let x16 = rec["intervention"]["node16"].as_f64().unwrap();
    assert!(
        (rec["intervention_raw"]["node16"].as_f64().unwrap() - (55.0 + 8.0 * x16)).abs() < 1e-12
    );
}

#[tokio::test]
async fn cors_allows_browser_origins() {
    let app = app(reference_session(vec![], None));
    let req = Request::builder()
        .uri("/api/graph")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}

#[test]
fn session_rejects_bad_configuration() {
    let scm = student_reference_scm((0.19, 0.486, 0.187));
    let new = |rows: Vec<Vec<f64>>, target: Option<&str>, actionable: Option<&[String]>| {
        SessionState::new(scm.clone(), rows, None, target, actionable, -0.901)
    };
    assert!(new(vec![vec![0.0; 3]], None, None).is_err());
    assert!(new(vec![vec![0.0, 0.0, f64::NAN, 0.0]], None, None).is_err());
    assert!(new(vec![], Some("zz"), None).is_err());
    assert!(new(vec![], None, Some(&[])).is_err());
    assert!(new(vec![], None, Some(&["node39".to_string()])).is_err());
    assert!(SessionState::new(scm.clone(), vec![], None, None, None, f64::INFINITY).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recommendations_replay_as_passing(
        x13 in -3.0f64..3.0, x16 in -3.0f64..3.0, x34 in -3.0f64..3.0, y in -3.0f64..3.0,
        pick in 1usize..8,
    ) {
        let s = reference_session(vec![vec![x13, x16, x34, y]], None);
        let names = ["node13", "node16", "node34"];
        let actionable: Vec<String> = (0..3)
            .filter(|i| pick & (1 << i) != 0)
            .map(|i| names[i].to_string())
            .collect();
        let rec = s.recommend(&RecommendRequest {
            observation_id: Some(0),
            actionable: Some(actionable),
            ..Default::default()
        }).unwrap();
        let cf = s.counterfactual(&CounterfactualRequest {
            observation_id: Some(0),
            interventions: rec.intervention.clone(),
            ..Default::default()
        }).unwrap();
        prop_assert!(cf.passes);
        prop_assert!(rec.passes);
        if y >= -0.901 {
            prop_assert!(rec.intervention.is_empty());
        } else {
            prop_assert!((cf.outcome + 0.901).abs() < 1e-6);
        }
    }
}

#[test]
fn serve_command_answers_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let scm = dir.path().join("scm.json");
    causal_advisor_core::io::save_scm(&student_reference_scm((0.19, 0.486, 0.187)), &scm).unwrap();
    let data = dir.path().join("data.csv");
    std::fs::write(
        &data,
        "node13,node16,node34,node39\n0.06,-2.57,-0.365,-1.29\n0.5,0.2,0.1,0.3\n",
    )
    .unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_causal-advisor"))
        .args([
            "serve",
            "--scm",
            scm.to_str().unwrap(),
            "--data",
            data.to_str().unwrap(),
            "--port",
            "0",
        ])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut addr = None;
    let mut line = String::new();
    while stderr.read_line(&mut line).unwrap() > 0 {
        if let Some(rest) = line.trim().strip_prefix("listening on http://") {
            addr = Some(rest.to_string());
        }
        if line.starts_with("manifest: ") {
            break;
        }
        line.clear();
    }
    let addr = addr.expect("server announced its address");

    let get = |path: &str| {
        let mut stream = TcpStream::connect(&addr).unwrap();
        write!(
            stream,
            "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
        )
        .unwrap();
        let mut text = String::new();
        stream.read_to_string(&mut text).unwrap();
        text
    };
    let observations = get("/api/observations");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(observations.starts_with("HTTP/1.1 200"), "{observations}");
    let body = &observations[observations.find("\r\n\r\n").unwrap() + 4..];
    let rows: Value = serde_json::from_str(body).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["passes"], false);
    assert_eq!(rows[1]["passes"], true);
}
