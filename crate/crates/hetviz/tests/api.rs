mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use hetviz::api::router;
use hetviz::session::SessionStore;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

const TOY: &str = "odor,size,class\na,s,e\na,l,e\nn,s,p\nn,l,p\n?,s,e\nn,s,p\n";

async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: Method, uri: &str, body: Json) -> (StatusCode, Json) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn parse(bytes: &[u8]) -> Json {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn app() -> (Arc<SessionStore>, Router) {
    let store = Arc::new(SessionStore::new());
    let app = router(Arc::clone(&store), hetviz::api::DEFAULT_UPLOAD_LIMIT);
    (store, app)
}

async fn upload(app: &Router, csv: &str) -> String {
    let (status, body) = call(app, Method::POST, "/api/datasets", csv.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
    parse(&body)["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn upload_reports_shape() {
    let (store, app) = app();
    let (status, body) = call(&app, Method::POST, "/api/datasets?target=odor", TOY.to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    let summary = parse(&body);
    assert_eq!(summary["rows"], 6);
    assert_eq!(summary["attributes"], json!(["odor", "size", "class"]));
    assert_eq!(summary["target"], "odor");
    assert_eq!(store.len(), 1);
}

#[tokio::test]
async fn upload_options_for_headerless_files() {
    let (_, app) = app();
    let text = "| comment line\n 1 , x , e\n 2 , y , p\n";
    let (status, body) =
        call(&app, Method::POST, "/api/datasets?header=false&trim=true&comment=%7C", text.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
    let summary = parse(&body);
    assert_eq!(summary["attributes"], json!(["X1", "X2", "X3"]));
    assert_eq!(summary["rows"], 2);
}

#[tokio::test]
async fn layout_bars_sum_to_row_count() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let (status, body) = call(&app, Method::GET, &format!("/api/datasets/{id}/layout?keep_constant=true"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let bundle = parse(&body);
    assert_eq!(bundle["rows"], 6);
    for layout in bundle["layouts"].as_array().unwrap() {
        let total: u64 = layout["bars"].as_array().unwrap().iter().map(|b| b["total"].as_u64().unwrap()).sum();
        assert_eq!(total, 6, "axis {}", layout["attribute"]);
    }
}

#[tokio::test]
async fn scheme_put_invalidates_cached_layouts() {
    let (store, app) = app();
    let id = upload(&app, TOY).await;
    let uri = format!("/api/datasets/{id}/layout");
    let (_, before) = call(&app, Method::GET, &uri, Body::empty()).await;
    assert_eq!(parse(&before)["reference"], "class");
    assert_eq!(store.get(&id).unwrap().read().unwrap().cached_layouts(), 1);

    let (status, text) = call(&app, Method::GET, &format!("/api/datasets/{id}/scheme"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let mut doc = parse(&text);
    doc["target"] = json!("size");
    let (status, _) = call(&app, Method::PUT, &format!("/api/datasets/{id}/scheme"), doc.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(store.get(&id).unwrap().read().unwrap().cached_layouts(), 0);

    let (_, after) = call(&app, Method::GET, &uri, Body::empty()).await;
    assert_eq!(parse(&after)["reference"], "size");
}

#[tokio::test]
async fn bad_scheme_put_is_rejected_and_changes_nothing() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let uri = format!("/api/datasets/{id}/scheme");
    let (_, original) = call(&app, Method::GET, &uri, Body::empty()).await;

    let mut doc = parse(&original);
    doc["attributes"][0].as_object_mut().unwrap().remove("mtype");
    let (status, body) = call(&app, Method::PUT, &uri, doc.to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err = parse(&body);
    assert_eq!(err["code"], "malformed_document");
    assert!(err["message"].as_str().unwrap().contains("odor"), "{err}");

    let (status, _) = call(&app, Method::PUT, &uri, "{ not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, now) = call(&app, Method::GET, &uri, Body::empty()).await;
    assert_eq!(now, original);
}

#[tokio::test]
async fn report_and_render_endpoints() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let (status, body) = call(&app, Method::GET, &format!("/api/datasets/{id}/report?purity=0.8&minsize=0.1"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(parse(&body)["report"].is_array());

    let req = Request::get(format!("/api/datasets/{id}/render.svg?mode=aggregated_edges")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()[header::CONTENT_TYPE], "image/svg+xml");
    let svg = resp.into_body().collect().await.unwrap().to_bytes();
    assert!(String::from_utf8_lossy(&svg).contains("<svg"));
}

#[tokio::test]
async fn encode_discover_and_rules() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let (status, enc) = call_json(
        &app,
        Method::POST,
        &format!("/api/datasets/{id}/encode"),
        json!({"attr": "odor", "encoder": "frequency"}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{enc}");
    assert_eq!(enc["code_map"]["n"], json!([0.5]));

    let (status, blocks) = call_json(&app, Method::POST, &format!("/api/datasets/{id}/hyperblocks/discover"), json!(null)).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!blocks.as_array().unwrap().is_empty());
    let (_, stored) = call(&app, Method::GET, &format!("/api/datasets/{id}/hyperblocks"), Body::empty()).await;
    assert_eq!(parse(&stored), blocks);

    let rule = blocks[0]["rule"].clone();
    let (status, metrics) = call_json(&app, Method::POST, &format!("/api/datasets/{id}/rules/eval"), rule).await;
    assert_eq!(status, StatusCode::OK, "{metrics}");
    assert_eq!(metrics["coverage"], blocks[0]["purity"]["total"]);
}

#[tokio::test]
async fn forbidden_rule_is_unprocessable() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let rule = json!({
        "antecedent": {"atom": "threshold", "attr": "odor", "params": {"op": "lt", "threshold": 2}},
        "consequent": "p"
    });
    let (status, err) = call_json(&app, Method::POST, &format!("/api/datasets/{id}/rules/eval"), rule).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{err}");
    assert_eq!(err["code"], "forbidden_operation");
    assert_eq!(err["attribute"], "odor");
}

#[tokio::test]
async fn view_round_trip_and_validation() {
    let (_, app) = app();
    let id = upload(&app, TOY).await;
    let uri = format!("/api/datasets/{id}/view");
    let (_, body) = call(&app, Method::GET, &uri, Body::empty()).await;
    let mut cfg = parse(&body);
    cfg["purity_threshold"] = json!(0.9);
    let (status, _) = call_json(&app, Method::PUT, &uri, cfg.clone()).await;
    assert_eq!(status, StatusCode::OK);
    let (_, body) = call(&app, Method::GET, &uri, Body::empty()).await;
    assert_eq!(parse(&body)["purity_threshold"], 0.9);

    cfg["purity_threshold"] = json!(1.5);
    let (status, _) = call_json(&app, Method::PUT, &uri, cfg).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn error_statuses() {
    let (_, app) = app();
    let (status, body) = call(&app, Method::GET, "/api/datasets/ds99/layout", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(parse(&body)["code"], "not_found");

    let (status, _) = call(&app, Method::GET, "/api/nothing", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, body) = call(&app, Method::POST, "/api/datasets", "a,b\n1,2\n3\n").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err = parse(&body);
    assert_eq!(err["code"], "malformed_csv");
    assert!(err["message"].as_str().unwrap().contains("line 3"), "{err}");

    let (status, body) = call(&app, Method::POST, "/api/datasets?target=nope", TOY.to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["attribute"], "nope");

    let id = upload(&app, TOY).await;
    let (status, body) = call(&app, Method::GET, &format!("/api/datasets/{id}/layout?purity=abc"), Body::empty()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["code"], "malformed_query");

    let (status, body) = call(&app, Method::GET, &format!("/api/datasets/{id}/layout?ref=missing"), Body::empty()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["code"], "unknown_attribute");

    let (status, body) = call(&app, Method::POST, &format!("/api/datasets/{id}/rules/eval"), "{}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{}", String::from_utf8_lossy(&body));
}

#[tokio::test]
async fn upload_cap_is_enforced() {
    let store = Arc::new(SessionStore::new());
    let app = router(Arc::clone(&store), 64);
    let big = "a,b\n".to_string() + &"1,2\n".repeat(40);
    let (status, body) = call(&app, Method::POST, "/api/datasets", big).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(parse(&body)["code"], "payload_too_large");
    assert!(store.is_empty());
    let (status, _) = call(&app, Method::POST, "/api/datasets", "a,b\n1,2\n").await;
    assert_eq!(status, StatusCode::CREATED);
}

#[tokio::test]
async fn default_cap_accepts_the_census_file() {
    let (_, app) = app();
    let bytes = std::fs::read(common::data_path("census-income.data")).unwrap();
    assert!(bytes.len() < hetviz::api::DEFAULT_UPLOAD_LIMIT);
    let (status, body) =
        call(&app, Method::POST, "/api/datasets?header=false&trim=true&comment=%7C", bytes).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
    assert_eq!(parse(&body)["rows"], 48842);
}
