use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use r3_cli::config::ServiceConfig;
use r3_cli::service::{router, AppState};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;
use tower::ServiceExt;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn app_for(root: &Path) -> axum::Router {
    let config = ServiceConfig {
        corpus_path: root.to_path_buf(),
        ..ServiceConfig::default()
    };
    router(AppState::load(config).unwrap())
}

async fn send(app: &axum::Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn post_json(app: &axum::Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    let (status, body) = send(app, req).await;
    (status, serde_json::from_slice(&body).unwrap())
}

const BOUNDARY: &str = "r3-test-boundary";

fn multipart(fields: &[(&str, &[u8])]) -> Request<Body> {
    let mut body = Vec::new();
    for (name, data) in fields {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        let disposition = if *name == "image" {
            format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"q.png\"\r\nContent-Type: image/png\r\n\r\n")
        } else {
            format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n")
        };
        body.extend_from_slice(disposition.as_bytes());
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::post("/query")
        .header(
            "content-type",
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap()
}

fn cli_json(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_r3"))
        .args(args)
        .env_remove("R3_CORPUS")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[tokio::test]
async fn health_and_listing() {
    let app = app_for(&corpus());
    let (status, v) = get(&app, "/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["recipes"], 12);
    let (_, v) = get(&app, "/recipes").await;
    assert_eq!(v["recipes"].as_array().unwrap().len(), 12);
    let (status, v) = get(&app, "/recipes/hummus").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["id"], "hummus");
}

#[tokio::test]
async fn missing_recipe_has_an_error_body() {
    let app = app_for(&corpus());
    let (status, v) = get(&app, "/recipes/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not_found");
    assert!(v["message"].as_str().unwrap().contains("nope"));
}

#[tokio::test]
async fn maize_utterance_matches_cli() {
    let app = app_for(&corpus());
    let (status, api) =
        post_json(&app, "/query", r#"{"utterance": "without maize allergen"}"#).await;
    assert_eq!(status, StatusCode::OK);
    let root = corpus();
    let cli = cli_json(&[
        "query",
        "--text",
        "without maize allergen",
        "--corpus",
        root.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(api, cli);
    assert!(!api["matches"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn bacon_image_matches_cli() {
    let app = app_for(&corpus());
    let png = std::fs::read(corpus().join("queries/bacon_shifted.png")).unwrap();
    let (status, body) = send(
        &app,
        multipart(&[("image", &png), ("image_kind", b"ingredient")]),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let api: Value = serde_json::from_slice(&body).unwrap();
    let root = corpus();
    let image = root.join("queries/bacon_shifted.png");
    let cli = cli_json(&[
        "query",
        "--image",
        image.to_str().unwrap(),
        "--corpus",
        root.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(api, cli);
    let ids: Vec<&str> = api["matches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 3, "{ids:?}");
}

#[tokio::test]
async fn bad_queries_are_client_errors() {
    let app = app_for(&corpus());
    let (status, v) = post_json(
        &app,
        "/query",
        r#"{"kind": "Telepathy", "text_param": "x"}"#,
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "unknown_kind");
    let (status, _) = post_json(&app, "/query", "not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, v) = send(&app, multipart(&[("image", b"definitely not a png")])).await;
    assert_eq!(
        status,
        StatusCode::BAD_REQUEST,
        "{}",
        String::from_utf8_lossy(&v)
    );
}

#[tokio::test]
async fn media_is_served_without_traversal() {
    let app = app_for(&corpus());
    let res = app
        .clone()
        .oneshot(
            Request::get("/media/ingredients/bacon.png")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(res.headers()["content-type"], "image/png");
    let (status, _) = get(&app, "/media/../recipes/hummus.json").await;
    assert!(status.is_client_error());
    let (status, _) = get(&app, "/media/ingredients/missing.png").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[tokio::test]
async fn reload_swaps_or_keeps_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("corpus");
    copy_dir(&corpus(), &root);
    let app = app_for(&root);

    std::fs::remove_file(root.join("recipes/hummus.json")).unwrap();
    let (status, v) = post_json(&app, "/admin/reload", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["recipes"], 11);

    std::fs::write(root.join("recipes/broken.json"), "{").unwrap();
    let (status, v) = post_json(&app, "/admin/reload", "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "reload_failed");
    let (_, v) = get(&app, "/health").await;
    assert_eq!(v["recipes"], 11);
}
