//! HTTP API under `/api/`. Every response is JSON except `render.svg`.

use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hetviz_core::encode::{encode, EncoderKind, EncoderParams, EncodingResult};
use hetviz_core::render::{RenderMode, RenderSpec};
use hetviz_core::rules::{Rule, RuleMetrics};
use hetviz_core::view::ViewConfig;
use serde::{Deserialize, Serialize};

use crate::csvio::{parse_csv, CsvOptions};
use crate::engine::{self, DiscoveredBlock, ViewParams};
use crate::error::HetvizError;
use crate::schemefile::{load_scheme, save_scheme};
use crate::session::{Session, SessionStore};

pub const DEFAULT_UPLOAD_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.into(),
            message: message.into(),
            attribute: None,
            value: None,
        }
    }

    fn unknown_session(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no dataset `{id}`"))
    }

    fn malformed(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_body", message)
    }
}

impl From<HetvizError> for ApiError {
    fn from(e: HetvizError) -> Self {
        let status = match &e {
            HetvizError::Engine(hetviz_core::Error::Forbidden { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            HetvizError::Engine(hetviz_core::Error::NoTarget) => StatusCode::CONFLICT,
            HetvizError::NotFound(_) => StatusCode::NOT_FOUND,
            HetvizError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut out = ApiError::new(status, e.code(), e.to_string());
        if let HetvizError::Engine(inner) = &e {
            out.attribute = inner.attribute().map(String::from);
            out.value = inner.value().map(String::from);
        }
        out
    }
}

impl From<hetviz_core::Error> for ApiError {
    fn from(e: hetviz_core::Error) -> Self {
        HetvizError::from(e).into()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::malformed(r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", r.body_text())
    }
}

impl From<BytesRejection> for ApiError {
    fn from(r: BytesRejection) -> Self {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "payload_too_large" } else { "malformed_body" };
        ApiError::new(status, code, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Store = Arc<SessionStore>;

fn session(store: &SessionStore, id: &str) -> ApiResult<Arc<RwLock<Session>>> {
    store.get(id).ok_or_else(|| ApiError::unknown_session(id))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct UploadParams {
    pub header: Option<bool>,
    pub delimiter: Option<char>,
    pub missing: Option<String>,
    pub comment: Option<char>,
    pub trim: Option<bool>,
    pub target: Option<String>,
}

impl UploadParams {
    fn csv_options(&self) -> ApiResult<CsvOptions> {
        let byte = |c: char, what: &str| -> ApiResult<u8> {
            u8::try_from(c)
                .ok()
                .filter(u8::is_ascii)
                .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "invalid_argument", format!("{what} must be ASCII")))
        };
        let mut opts = CsvOptions::default();
        if let Some(h) = self.header {
            opts.has_header = h;
        }
        if let Some(d) = self.delimiter {
            opts.delimiter = byte(d, "delimiter")?;
        }
        if let Some(m) = &self.missing {
            opts.missing_token = m.clone();
        }
        if let Some(c) = self.comment {
            opts.comment = Some(byte(c, "comment")?);
        }
        if let Some(t) = self.trim {
            opts.trim = t;
        }
        Ok(opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
    pub rows: usize,
    pub attributes: Vec<String>,
    pub target: Option<String>,
}

fn summary(s: &Session) -> DatasetSummary {
    let ds = s.dataset();
    DatasetSummary {
        id: s.id.clone(),
        rows: ds.len(),
        attributes: ds.attributes().iter().map(|a| a.name.clone()).collect(),
        target: ds.target().map(|t| ds.attribute(t).name.clone()),
    }
}

async fn upload(
    State(store): State<Store>,
    params: Result<Query<UploadParams>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<(StatusCode, Json<DatasetSummary>)> {
    let Query(params) = params?;
    let body = body?;
    let raw = parse_csv(&body, &params.csv_options()?)?;
    let scheme = engine::default_scheme(&raw, params.target.as_deref())?;
    let created = store.create(raw, scheme)?;
    let s = created.read().expect("session poisoned");
    Ok((StatusCode::CREATED, Json(summary(&s))))
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn get_scheme(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    Ok(json_text(save_scheme(s.scheme())))
}

async fn put_scheme(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let body = body?;
    let s = session(&store, &id)?;
    let doc = load_scheme(&body)?;
    let mut s = s.write().expect("session poisoned");
    s.set_scheme(doc)?;
    Ok(json_text(save_scheme(s.scheme())))
}

#[derive(Debug, Clone, Deserialize)]
pub struct EncodeRequest {
    pub attr: String,
    pub encoder: EncoderKind,
    #[serde(default)]
    pub params: EncoderParams,
}

async fn encode_attr(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Result<Json<EncodeRequest>, JsonRejection>,
) -> ApiResult<Json<EncodingResult>> {
    let Json(req) = body?;
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    let ds = s.dataset();
    let col = ds.index_of(&req.attr)?;
    Ok(Json(encode(ds, col, req.encoder, &req.params)?))
}

fn view_config(s: &Session, params: &ViewParams) -> ApiResult<ViewConfig> {
    Ok(params.apply(&s.view)?)
}

async fn layout(
    State(store): State<Store>,
    Path(id): Path<String>,
    params: Result<Query<ViewParams>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(params) = params?;
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    let bundle = s.layout(&view_config(&s, &params)?)?;
    Ok(Json(&*bundle).into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub report: Vec<String>,
}

async fn report(
    State(store): State<Store>,
    Path(id): Path<String>,
    params: Result<Query<ViewParams>, QueryRejection>,
) -> ApiResult<Json<ReportResponse>> {
    let Query(params) = params?;
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    let bundle = s.layout(&view_config(&s, &params)?)?;
    Ok(Json(ReportResponse { report: bundle.report.clone() }))
}

async fn discover(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<Vec<DiscoveredBlock>>> {
    let s = session(&store, &id)?;
    let mut s = s.write().expect("session poisoned");
    let found = engine::discover(s.dataset())?;
    s.hyperblocks = found.clone();
    Ok(Json(found))
}

async fn hyperblocks(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<Vec<DiscoveredBlock>>> {
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    Ok(Json(s.hyperblocks.clone()))
}

async fn eval_rule(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Result<Json<Rule>, JsonRejection>,
) -> ApiResult<Json<RuleMetrics>> {
    let Json(rule) = body?;
    let s = session(&store, &id)?;
    let mut s = s.write().expect("session poisoned");
    let metrics = engine::evaluate_rule(s.dataset(), &rule)?;
    s.rules.push(rule);
    Ok(Json(metrics))
}

async fn get_view(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<ViewConfig>> {
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    Ok(Json(s.view.clone()))
}

async fn put_view(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Result<Json<ViewConfig>, JsonRejection>,
) -> ApiResult<Json<ViewConfig>> {
    let Json(cfg) = body?;
    cfg.validate()?;
    let s = session(&store, &id)?;
    let mut s = s.write().expect("session poisoned");
    s.view = cfg.clone();
    Ok(Json(cfg))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct RenderParams {
    pub mode: Option<RenderMode>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub frames: Option<bool>,
    pub frame_threshold: Option<f64>,
    pub report: Option<bool>,
}

impl RenderParams {
    pub fn spec(&self) -> RenderSpec {
        let mut spec = RenderSpec::default();
        if let Some(m) = self.mode {
            spec.mode = m;
        }
        if let Some(w) = self.width {
            spec.width = w;
        }
        if let Some(h) = self.height {
            spec.height = h;
        }
        if let Some(f) = self.frames {
            spec.show_purity_frames = f;
        }
        if let Some(t) = self.frame_threshold {
            spec.frame_threshold = t;
        }
        if let Some(r) = self.report {
            spec.show_report = r;
        }
        spec
    }
}

async fn render_svg(
    State(store): State<Store>,
    Path(id): Path<String>,
    view: Result<Query<ViewParams>, QueryRejection>,
    render: Result<Query<RenderParams>, QueryRejection>,
) -> ApiResult<Response> {
    let (Query(view), Query(render)) = (view?, render?);
    let s = session(&store, &id)?;
    let s = s.read().expect("session poisoned");
    let cfg = view_config(&s, &view)?;
    let svg = engine::render(s.dataset(), &cfg, &render.spec())?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(store: Store, upload_limit: usize) -> Router {
    Router::new()
        .route("/api/datasets", post(upload))
        .route("/api/datasets/{id}/scheme", get(get_scheme).put(put_scheme))
        .route("/api/datasets/{id}/encode", post(encode_attr))
        .route("/api/datasets/{id}/layout", get(layout))
        .route("/api/datasets/{id}/report", get(report))
        .route("/api/datasets/{id}/hyperblocks/discover", post(discover))
        .route("/api/datasets/{id}/hyperblocks", get(hyperblocks))
        .route("/api/datasets/{id}/rules/eval", post(eval_rule))
        .route("/api/datasets/{id}/view", get(get_view).put(put_view))
        .route("/api/datasets/{id}/render.svg", get(render_svg))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(upload_limit))
        .with_state(store)
}

pub async fn serve(port: u16, upload_limit: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let app = router(Arc::new(SessionStore::new()), upload_limit);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
