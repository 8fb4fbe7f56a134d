use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use npmt::bundled;
use npmt_service::commands;
use npmt_service::http::{router, Sessions};

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn example_session(app: &Router) -> String {
    let (status, view) = call(app, "POST", "/sessions", Some(json!({ "spec": bundled::EXAMPLE }))).await;
    assert_eq!(status, StatusCode::CREATED);
    view["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_returns_the_initial_view() {
    let app = router(Sessions::new());
    let (status, view) = call(&app, "POST", "/sessions", Some(json!({ "spec": bundled::EXAMPLE }))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(view["state"], "([],[λ])");
    assert_eq!(view["events"], 0);
    assert_eq!(view["determined"], json!([]));
    assert_eq!(view["undetermined"], json!([{ "symbol": "R1", "point": [0] }, { "symbol": "R1", "point": [1] }]));
}

#[tokio::test]
async fn sessions_are_independent() {
    let sessions = Sessions::new();
    let app = router(sessions.clone());
    let a = example_session(&app).await;
    let b = example_session(&app).await;
    assert_ne!(a, b);
    assert_eq!(sessions.len(), 2);
    call(&app, "POST", &format!("/sessions/{a}/query"), Some(json!({ "symbol": "R1", "point": [1] }))).await;
    let (_, view_b) = call(&app, "GET", &format!("/sessions/{b}/state"), None).await;
    assert_eq!(view_b["state"], "([],[λ])");
}

#[tokio::test]
async fn example_protocol_over_http() {
    let app = router(Sessions::new());
    let id = example_session(&app).await;
    let (_, watched) = call(&app, "POST", &format!("/sessions/{id}/eval"), Some(json!({ "formula": "R1(0)" }))).await;
    assert_eq!(watched["satisfied"], false);

    let q = |point: u32| Some(json!({ "symbol": "R1", "point": [point] }));
    let (status, first) = call(&app, "POST", &format!("/sessions/{id}/query"), q(0)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((first["value"].clone(), first["seq"].clone(), first["new_event"].clone()), (json!(1), json!(1), json!(true)));
    assert_eq!(first["view"]["watchlist"][0]["satisfied"], true);
    assert_eq!(first["view"]["watchlist"][0]["satisfied_since"], 1);

    let (_, second) = call(&app, "POST", &format!("/sessions/{id}/query"), q(1)).await;
    assert_eq!((second["value"].clone(), second["seq"].clone()), (json!(0), json!(2)));
    let (_, again) = call(&app, "POST", &format!("/sessions/{id}/query"), q(0)).await;
    assert_eq!((again["value"].clone(), again["new_event"].clone()), (json!(1), json!(false)));

    let (_, state) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(state["state"], "([],[⟨(0),(1)⟩])");
    let (_, log) = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    assert_eq!(
        log["events"],
        json!([
            { "seq": 1, "symbol": "R1", "point": [0], "value": 1 },
            { "seq": 2, "symbol": "R1", "point": [1], "value": 0 }
        ])
    );
}

#[tokio::test]
async fn errors_are_structured() {
    let app = router(Sessions::new());
    let (status, err) = call(&app, "GET", "/sessions/nope/state", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "unknown_session");
    assert!(err.get("position").is_none());

    let (status, err) = call(&app, "POST", "/sessions", Some(json!({ "spec": "universe\n" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid_spec");

    let (status, err) = call(&app, "POST", "/sessions", Some(json!({ "text": "x" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "bad_request");

    let id = example_session(&app).await;
    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/eval"), Some(json!({ "formula": "R1(0" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!((err["code"].clone(), err["position"].clone()), (json!("syntax_error"), json!(4)));
    let (_, err) = call(&app, "POST", &format!("/sessions/{id}/eval"), Some(json!({ "formula": "R1(x)" }))).await;
    assert_eq!(err["code"], "open_formula");
    let (_, err) =
        call(&app, "POST", &format!("/sessions/{id}/query"), Some(json!({ "symbol": "R1", "point": [5] }))).await;
    assert_eq!(err["code"], "element_outside_universe");
}

#[tokio::test]
async fn reports_match_the_cli_byte_for_byte() {
    let app = router(Sessions::new());
    let id = example_session(&app).await;
    for formula in ["R1(0) | !R1(0)", "!!(R1(0) | !R1(0))", "forall x. R1(x)", "exists x. R1(x)", "R1(0) -> R1(1)"] {
        let (_, http) = call(&app, "POST", &format!("/sessions/{id}/eval"), Some(json!({ "formula": formula }))).await;
        let cli = commands::check(bundled::EXAMPLE, formula, &[], None).unwrap();
        assert_eq!(http["report"].as_str().unwrap(), cli.stdout, "{formula}");
    }
    call(&app, "POST", &format!("/sessions/{id}/query"), Some(json!({ "symbol": "R1", "point": [1] }))).await;
    let (_, http) = call(&app, "POST", &format!("/sessions/{id}/eval"), Some(json!({ "formula": "R1(0)" }))).await;
    let cli = commands::check(bundled::EXAMPLE, "R1(0)", &[], Some("([],[⟨(1)⟩])")).unwrap();
    assert_eq!(http["report"].as_str().unwrap(), cli.stdout);
}

#[tokio::test]
async fn concurrent_queries_on_one_session_are_serialized() {
    let sessions = Sessions::new();
    let app = router(sessions.clone());
    let (_, view) = call(&app, "POST", "/sessions", Some(json!({ "spec": bundled::TWO_RELATIONS }))).await;
    let id = view["id"].as_str().unwrap().to_string();
    let mut tasks = Vec::new();
    for sym in ["P", "Q"] {
        for d in 0..3u32 {
            let app = app.clone();
            let uri = format!("/sessions/{id}/query");
            tasks.push(tokio::spawn(async move {
                call(&app, "POST", &uri, Some(json!({ "symbol": sym, "point": [d] }))).await
            }));
        }
    }
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    let (_, log) = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    let seqs: Vec<u64> = log["events"].as_array().unwrap().iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, vec![1, 2, 3, 4, 5, 6]);
    sessions
        .with(&id, |s| {
            let replayed = npmt_service::Session::replay("x", &s.log_lines())?;
            assert_eq!(replayed.state(), s.state());
            Ok(())
        })
        .unwrap();
}
