//! HTTP API over a corpus snapshot.

use crate::config::ServiceConfig;
use crate::response::{queries_from_json, run_query, RecipeCard};
use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use r3_core::load_corpus;
use r3_core::query::{GridDescriptor, Query, QueryError, QueryKind, Retriever};
use serde_json::{json, Value};
use std::path::Component;
use std::sync::{Arc, RwLock};

/// Error body: `{"code", "message", "detail"}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    fn bad_query(e: QueryError) -> Self {
        let code = match e {
            QueryError::UnknownKind(_) => "unknown_kind",
            QueryError::Image(_) => "bad_image",
            _ => "bad_query",
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }

    fn not_found(what: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("{what} not found"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"code": self.code, "message": self.message, "detail": self.detail});
        (self.status, Json(body)).into_response()
    }
}

/// Shared state. Queries clone the current snapshot, so a reload never
/// disturbs requests already in flight.
pub struct AppState {
    config: ServiceConfig,
    snapshot: RwLock<Arc<Retriever>>,
}

impl AppState {
    pub fn load(config: ServiceConfig) -> anyhow::Result<Arc<Self>> {
        let retriever = build_retriever(&config)?;
        Ok(Arc::new(Self {
            config,
            snapshot: RwLock::new(Arc::new(retriever)),
        }))
    }

    pub fn snapshot(&self) -> Arc<Retriever> {
        self.snapshot
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    fn swap(&self, retriever: Retriever) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(retriever);
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }
}

pub fn build_retriever(config: &ServiceConfig) -> anyhow::Result<Retriever> {
    let corpus = load_corpus(&config.corpus_path)
        .with_context(|| format!("cannot load corpus {}", config.corpus_path.display()))?;
    Ok(Retriever::with_provider(
        corpus,
        config.step_unit,
        Box::new(GridDescriptor),
    ))
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_upload_bytes;
    Router::new()
        .route("/health", get(health))
        .route("/recipes", get(list_recipes))
        .route("/recipes/{id}", get(get_recipe))
        .route("/query", post(query))
        .route("/admin/reload", post(reload))
        .route("/media/{*path}", get(media))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Binds and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let bind = config.bind_address.clone();
    let state = AppState::load(config)?;
    let listener = tokio::net::TcpListener::bind(&bind)
        .await
        .with_context(|| format!("cannot bind {bind}"))?;
    eprintln!(
        "serving {} recipes on http://{}",
        state.snapshot().corpus().len(),
        listener.local_addr()?
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snap = state.snapshot();
    Json(json!({
        "status": "ok",
        "recipes": snap.corpus().len(),
        "skipped_media": snap.skipped_media().len(),
    }))
}

async fn list_recipes(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snap = state.snapshot();
    let cards: Vec<RecipeCard> = snap
        .corpus()
        .recipes()
        .iter()
        .map(|r| RecipeCard::new(r, &snap))
        .collect();
    Json(json!({ "recipes": cards }))
}

async fn get_recipe(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let snap = state.snapshot();
    let recipe = snap
        .corpus()
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&format!("recipe `{id}`")))?;
    Ok(Json(recipe).into_response())
}

fn too_large(limit: usize) -> ApiError {
    ApiError::new(
        StatusCode::PAYLOAD_TOO_LARGE,
        "payload_too_large",
        format!("request body exceeds {limit} bytes"),
    )
}

async fn query(State(state): State<Arc<AppState>>, req: Request) -> Result<Response, ApiError> {
    let limit = state.config.max_upload_bytes;
    let threshold = state.config.default_threshold;
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let queries = if is_multipart {
        let form = Multipart::from_request(req, &state)
            .await
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text()))?;
        multipart_queries(form, threshold, limit).await?
    } else {
        let body = axum::body::to_bytes(req.into_body(), limit)
            .await
            .map_err(|_| too_large(limit))?;
        let value: Value = serde_json::from_slice(&body).map_err(|e| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "bad_request",
                format!("body is not JSON: {e}"),
            )
        })?;
        queries_from_json(value, threshold).map_err(ApiError::bad_query)?
    };
    let snap = state.snapshot();
    let response = run_query(&snap, &queries).map_err(ApiError::bad_query)?;
    Ok(Json(response).into_response())
}

/// Form fields: `query` (JSON as for a JSON body), `utterance` (typed
/// text), `image` (file), `image_kind` (`ingredient` or `dish`).
async fn multipart_queries(
    mut form: Multipart,
    threshold: f64,
    limit: usize,
) -> Result<Vec<Query>, ApiError> {
    let mut queries = Vec::new();
    let mut image: Option<Bytes> = None;
    let mut image_kind = QueryKind::ImageIngredient;
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", m);
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.body_text()))? {
        let name = field.name().unwrap_or_default().to_owned();
        let data = field.bytes().await.map_err(|e| {
            if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
                too_large(limit)
            } else {
                bad(e.body_text())
            }
        })?;
        let text = || {
            String::from_utf8(data.to_vec())
                .map_err(|_| bad(format!("field `{name}` is not UTF-8")))
        };
        match name.as_str() {
            "query" => {
                let value: Value = serde_json::from_str(&text()?)
                    .map_err(|e| bad(format!("field `query`: {e}")))?;
                queries.extend(queries_from_json(value, threshold).map_err(ApiError::bad_query)?);
            }
            "utterance" => {
                let value = json!({"utterance": text()?, "threshold": threshold});
                queries.extend(queries_from_json(value, threshold).map_err(ApiError::bad_query)?);
            }
            "image_kind" => {
                image_kind = match text()?.trim() {
                    "ingredient" | "ImageIngredient" => QueryKind::ImageIngredient,
                    "dish" | "ImageDish" => QueryKind::ImageDish,
                    other => {
                        return Err(bad(format!(
                            "image_kind must be `ingredient` or `dish`, found `{other}`"
                        )))
                    }
                }
            }
            "image" => image = Some(data),
            other => return Err(bad(format!("unexpected form field `{other}`"))),
        }
    }
    if let Some(bytes) = image {
        queries.push(Query::image(image_kind, bytes.to_vec()).with_threshold(threshold));
    }
    Ok(queries)
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let config = state.config.clone();
    let built = tokio::task::spawn_blocking(move || build_retriever(&config))
        .await
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "reload_failed",
                e.to_string(),
            )
        })?;
    let retriever = built.map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "reload_failed",
            "corpus did not load; keeping the previous snapshot",
        )
        .with_detail(Value::String(format!("{e:#}")))
    })?;
    let n = retriever.corpus().len();
    state.swap(retriever);
    Ok(Json(json!({"status": "reloaded", "recipes": n})))
}

async fn media(
    State(state): State<Arc<AppState>>,
    Path(path): Path<String>,
) -> Result<Response, ApiError> {
    let rel = std::path::Path::new(&path);
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad_path",
            "media path must stay inside the corpus",
        ));
    }
    let full = state
        .snapshot()
        .corpus()
        .media_path(&format!("media/{path}"))
        .ok_or_else(|| ApiError::not_found("media"))?;
    let bytes = tokio::fs::read(&full)
        .await
        .map_err(|_| ApiError::not_found(&format!("media `{path}`")))?;
    let mime = match rel
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}
