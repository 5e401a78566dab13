//! HTTP/JSON interface.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/runs` | start a scoring run, 202 with its id |
//! | GET | `/runs/{id}` | run status and summary |
//! | GET | `/alerts` | `min_risk`, `state`, `stress`, `page`, `page_size`; risk desc, ties by student id |
//! | GET | `/alerts/{id}` | full alert |
//! | POST | `/alerts/{id}/events` | `{type, revision, actor?}` |
//! | GET | `/metrics/latest` | last evaluation report |
//! | GET | `/clock` | server time, for escalation countdowns |
//! | GET | `/health` | version info |
//!
//! Errors are `{"error": kind, "message": text}` with 404 for unknown ids
//! and missing artifacts, 409 for stale revisions and illegal transitions,
//! 422 for invalid bodies or query strings and 401 for a bad token.

use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use triad_core::explain::{Clock, PlanState};
use triad_core::pipeline::DataDir;
use triad_core::textpipe::StressTag;

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::runner::{self, RunRequest};
use crate::store::{Alert, AlertEventKind, Event, Store, LOG_VERSION};

pub const MAX_PAGE_SIZE: usize = 500;

/// Shared service state.
pub struct Service {
    pub store: RwLock<Store>,
    pub dir: DataDir,
    pub cfg: ServiceConfig,
    pub clock: Arc<dyn Clock>,
}

impl Service {
    pub fn open(cfg: ServiceConfig, clock: Arc<dyn Clock>) -> crate::error::Result<Arc<Self>> {
        let dir = DataDir::new(&cfg.data_dir);
        let store = Store::open(&dir.store(), cfg.snapshot_every)?;
        Ok(Arc::new(Self {
            store: RwLock::new(store),
            dir,
            cfg,
            clock,
        }))
    }
}

pub struct ApiError(ServiceError);

impl<E: Into<ServiceError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        Self(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.kind() {
            "NotFound" | "ModelMissing" | "CohortMissing" => StatusCode::NOT_FOUND,
            "StaleRevision" | "IllegalTransition" => StatusCode::CONFLICT,
            "InvalidBody" | "InvalidConfig" | "UnknownVariant" => StatusCode::UNPROCESSABLE_ENTITY,
            "Unauthorized" => StatusCode::UNAUTHORIZED,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = Json(json!({ "error": self.0.kind(), "message": self.0.line() }));
        (status, body).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// JSON body whose every rejection (syntax, type, unknown field, content
/// type) is a 422.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e: JsonRejection| ApiError(ServiceError::InvalidBody(e.body_text())))
    }
}

/// Query string with the same 422 rule.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Params(q.0))
            .map_err(|e: QueryRejection| ApiError(ServiceError::InvalidBody(e.body_text())))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlertQuery {
    pub min_risk: Option<f64>,
    pub state: Option<PlanState>,
    pub stress: Option<StressTag>,
    /// 1-based.
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

/// Row of the alert inbox.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertSummary {
    pub id: String,
    pub student_id: String,
    pub risk: f64,
    pub state: PlanState,
    pub stress: StressTag,
    pub action: String,
    pub escalation_due: Option<DateTime<Utc>>,
    pub acknowledged_by: Option<String>,
    pub revision: u64,
    pub created_at: DateTime<Utc>,
}

impl From<&Alert> for AlertSummary {
    fn from(a: &Alert) -> Self {
        Self {
            id: a.id.clone(),
            student_id: a.student_id.clone(),
            risk: a.risk,
            state: a.state(),
            stress: a.plan.stress,
            action: a.plan.current_action().to_string(),
            escalation_due: a.escalation_due(),
            acknowledged_by: a.acknowledged_by.clone(),
            revision: a.revision,
            created_at: a.created_at,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventBody {
    #[serde(rename = "type")]
    pub kind: AlertEventKind,
    pub revision: u64,
    #[serde(default)]
    pub actor: Option<String>,
}

/// Alerts matching `q`, ordered by risk descending, then student id, then
/// alert id.
pub fn list_alerts<'a>(alerts: impl Iterator<Item = &'a Alert>, q: &AlertQuery) -> Vec<&'a Alert> {
    let mut out: Vec<&Alert> = alerts
        .filter(|a| q.min_risk.is_none_or(|m| a.risk >= m))
        .filter(|a| q.state.is_none_or(|s| a.state() == s))
        .filter(|a| q.stress.is_none_or(|s| a.plan.stress == s))
        .collect();
    out.sort_by(|a, b| {
        b.risk
            .total_cmp(&a.risk)
            .then_with(|| a.student_id.cmp(&b.student_id))
            .then_with(|| a.id.cmp(&b.id))
    });
    out
}

async fn alerts(State(svc): State<Arc<Service>>, Params(q): Params<AlertQuery>) -> ApiResult<Response> {
    if q.min_risk.is_some_and(|m| !m.is_finite()) {
        return Err(ServiceError::InvalidBody("min_risk must be finite".into()).into());
    }
    let page = q.page.unwrap_or(1);
    let size = q.page_size.unwrap_or(svc.cfg.page_size);
    if page == 0 || size == 0 || size > MAX_PAGE_SIZE {
        return Err(ServiceError::InvalidBody(format!("page >= 1 and page_size in 1..={MAX_PAGE_SIZE}")).into());
    }
    let store = svc.store.read().expect("store lock");
    let all = list_alerts(store.state().alerts.values(), &q);
    let total = all.len();
    let items: Vec<AlertSummary> = all
        .into_iter()
        .skip((page - 1) * size)
        .take(size)
        .map(AlertSummary::from)
        .collect();
    let mut resp = Json(items).into_response();
    resp.headers_mut()
        .insert("x-total-count", HeaderValue::from_str(&total.to_string()).expect("digits"));
    Ok(resp)
}

async fn alert(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Json<Alert>> {
    let store = svc.store.read().expect("store lock");
    let a = store
        .state()
        .alerts
        .get(&id)
        .ok_or_else(|| ServiceError::NotFound(format!("alert {id}")))?;
    Ok(Json(a.clone()))
}

async fn alert_event(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Body(body): Body<EventBody>,
) -> ApiResult<Json<Alert>> {
    let mut store = svc.store.write().expect("store lock");
    store.commit(
        Event::AlertEvent {
            alert_id: id.clone(),
            kind: body.kind,
            actor: body.actor,
            revision: body.revision,
        },
        svc.clock.now(),
    )?;
    Ok(Json(store.state().alerts[&id].clone()))
}

async fn create_run(State(svc): State<Arc<Service>>, Body(req): Body<RunRequest>) -> ApiResult<Response> {
    let s = svc.clone();
    let (run, run_id) = tokio::task::spawn_blocking(move || {
        let run = runner::resolve(&s.dir, &s.cfg, &req)?;
        let id = runner::start(&s.store, &run, s.clock.now())?;
        Ok::<_, ServiceError>((run, id))
    })
    .await
    .map_err(|e| ServiceError::InvalidBody(e.to_string()))??;
    let s = svc.clone();
    let id = run_id.clone();
    tokio::task::spawn_blocking(move || {
        if let Err(e) = runner::execute(&s.store, &s.dir, &s.cfg, &run, &id, s.clock.as_ref()) {
            log::error!("{id} failed: {}", e.line());
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "run_id": run_id, "status": "running" }))).into_response())
}

async fn run_status(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = svc.store.read().expect("store lock");
    let run = store
        .state()
        .runs
        .get(&id)
        .ok_or_else(|| ServiceError::NotFound(format!("run {id}")))?;
    Ok(Json(run.clone()).into_response())
}

/// File the `evaluate` verb writes and `/metrics/latest` serves.
pub const LATEST_REPORT: &str = "latest.json";

async fn metrics(State(svc): State<Arc<Service>>) -> ApiResult<Response> {
    let path = svc.dir.report(LATEST_REPORT);
    let bytes = std::fs::read(&path).map_err(|_| ServiceError::NotFound("no evaluation report yet".into()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn health(State(svc): State<Arc<Service>>) -> Json<serde_json::Value> {
    let store = svc.store.read().expect("store lock");
    let st = store.state();
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "log_version": LOG_VERSION,
        "seq": st.seq,
        "alerts": st.alerts.len(),
        "dataset_version": st.dataset_version,
        "model_version": st.model_version,
        "last_run": st.last_run,
    }))
}

async fn clock(State(svc): State<Arc<Service>>) -> Json<serde_json::Value> {
    Json(json!({ "now": svc.clock.now() }))
}

async fn auth(State(svc): State<Arc<Service>>, req: Request, next: Next) -> Response {
    let token = &svc.cfg.token;
    if token.is_empty() || req.uri().path() == "/health" {
        return next.run(req).await;
    }
    let ok = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|t| t == token);
    if ok {
        next.run(req).await
    } else {
        ApiError(ServiceError::Unauthorized).into_response()
    }
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/runs", post(create_run))
        .route("/runs/{id}", get(run_status))
        .route("/alerts", get(alerts))
        .route("/alerts/{id}", get(alert))
        .route("/alerts/{id}/events", post(alert_event))
        .route("/metrics/latest", get(metrics))
        .route("/clock", get(clock))
        .route("/health", get(health))
        .layer(middleware::from_fn_with_state(svc.clone(), auth))
        .with_state(svc)
}

pub async fn serve(svc: Arc<Service>) -> crate::error::Result<()> {
    let listener = tokio::net::TcpListener::bind(&svc.cfg.bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
