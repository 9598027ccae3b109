//! HTTP evaluation service: simulated grasp trials and rectangle scoring
//! against a generated dataset, with every trial appended to a durable log.
//!
//! Routes, all JSON, in pixels and degrees:
//!
//! | method | path                                  |
//! |--------|---------------------------------------|
//! | GET    | `/api/v1/scenes`                      |
//! | GET    | `/api/v1/scenes/{id}`                 |
//! | POST   | `/api/v1/scenes/{id}/trials`          |
//! | POST   | `/api/v1/scenes/{id}/trials/batch`    |
//! | POST   | `/api/v1/scenes/{id}/rect-eval`       |
//! | GET    | `/api/v1/stats`                       |

pub mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use graspgen_core::dataset::{read_dataset, Dataset, DatasetScene};
use graspgen_core::{
    rect_match, simulate_grasp, Error as CoreError, FailureReason, Grasp, RectCriterionConfig,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub use store::{Stats, Submission, SubmissionLog, SubmittedGrasp};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot load dataset {path}: {source}")]
    Dataset { path: PathBuf, source: CoreError },
    #[error(transparent)]
    Store(#[from] store::StoreError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Server(std::io::Error),
}

/// Immutable dataset plus the single log writer.
pub struct AppState {
    dataset: Dataset,
    log: Mutex<SubmissionLog>,
}

impl AppState {
    pub fn new(dataset: Dataset, log: SubmissionLog) -> Arc<Self> {
        Arc::new(AppState {
            dataset,
            log: Mutex::new(log),
        })
    }

    pub fn load(dataset_dir: &Path, log_path: &Path) -> Result<Arc<Self>, ServeError> {
        let dataset = read_dataset(dataset_dir).map_err(|source| ServeError::Dataset {
            path: dataset_dir.to_path_buf(),
            source,
        })?;
        Ok(Self::new(dataset, SubmissionLog::open(log_path)?))
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/scenes", get(list_scenes))
        .route("/api/v1/scenes/{id}", get(scene_info))
        .route("/api/v1/scenes/{id}/trials", post(trial))
        .route("/api/v1/scenes/{id}/trials/batch", post(trial_batch))
        .route("/api/v1/scenes/{id}/rect-eval", post(rect_eval))
        .route("/api/v1/stats", get(stats))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(dataset_dir: &Path, addr: &str, log_path: &Path) -> Result<(), ServeError> {
    let state = AppState::load(dataset_dir, log_path)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: addr.to_string(),
            source,
        })?;
    if let Ok(a) = listener.local_addr() {
        log::info!(
            "serving {} scenes on http://{a}",
            state.dataset.scenes.len()
        );
    }
    serve_on(listener, state).await
}

pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
) -> Result<(), ServeError> {
    axum::serve(listener, router(state))
        .await
        .map_err(ServeError::Server)
}

/// Starts a server on an ephemeral local port in the background.
pub async fn spawn_local(state: Arc<AppState>) -> Result<SocketAddr, ServeError> {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|source| ServeError::Bind {
            addr: "127.0.0.1:0".into(),
            source,
        })?;
    let addr = listener.local_addr().map_err(ServeError::Server)?;
    tokio::spawn(async move {
        if let Err(e) = serve_on(listener, state).await {
            log::error!("{e}");
        }
    });
    Ok(addr)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    field: Option<String>,
    message: String,
}

impl ApiError {
    fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "validation",
            field: Some(field.into()),
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            kind: "not-found",
            field: None,
            message: format!("unknown scene {id:?}"),
        }
    }

    fn internal(kind: &'static str, message: String) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind,
            field: None,
            message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.kind, "field": self.field, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "validation",
            field: None,
            message: r.body_text(),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn scene<'a>(state: &'a AppState, id: &str) -> Result<&'a DatasetScene, ApiError> {
    state
        .dataset
        .scenes
        .get(id)
        .ok_or_else(|| ApiError::not_found(id))
}

fn object<'a>(v: &'a Value, prefix: &str) -> Result<&'a Map<String, Value>, ApiError> {
    v.as_object().ok_or_else(|| {
        ApiError::validation(
            if prefix.is_empty() {
                "body"
            } else {
                prefix.trim_end_matches('.')
            },
            "expected a JSON object",
        )
    })
}

fn number(obj: &Map<String, Value>, prefix: &str, name: &str) -> Result<Option<f64>, ApiError> {
    let field = || format!("{prefix}{name}");
    match obj.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => match v.as_f64() {
            Some(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(ApiError::validation(field(), "must be a finite number")),
        },
    }
}

fn required(obj: &Map<String, Value>, prefix: &str, name: &str) -> Result<f64, ApiError> {
    number(obj, prefix, name)?
        .ok_or_else(|| ApiError::validation(format!("{prefix}{name}"), "is required"))
}

fn check_theta(theta: f64, prefix: &str) -> Result<(), ApiError> {
    if theta > -90.0 && theta <= 90.0 {
        Ok(())
    } else {
        Err(ApiError::validation(
            format!("{prefix}theta"),
            "must be in (-90, 90] degrees",
        ))
    }
}

fn check_positive(v: f64, prefix: &str, name: &str) -> Result<(), ApiError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ApiError::validation(
            format!("{prefix}{name}"),
            "must be positive",
        ))
    }
}

fn check_center(s: &DatasetScene, x: f64, y: f64, prefix: &str) -> Result<(), ApiError> {
    let cam = s.scene.camera();
    if !(0.0..cam.width as f64).contains(&x) {
        return Err(ApiError::validation(
            format!("{prefix}x"),
            format!("must be in [0, {})", cam.width),
        ));
    }
    if !(0.0..cam.height as f64).contains(&y) {
        return Err(ApiError::validation(
            format!("{prefix}y"),
            format!("must be in [0, {})", cam.height),
        ));
    }
    Ok(())
}

/// A validated trial ready to simulate.
struct TrialInput {
    submitted: SubmittedGrasp,
    grasp: Grasp,
    jaw_m: f64,
}

fn parse_trial(
    state: &AppState,
    s: &DatasetScene,
    v: &Value,
    prefix: &str,
) -> Result<TrialInput, ApiError> {
    let obj = object(v, prefix)?;
    let submitted = SubmittedGrasp {
        x: required(obj, prefix, "x")?,
        y: required(obj, prefix, "y")?,
        theta: required(obj, prefix, "theta")?,
        opening: required(obj, prefix, "opening")?,
        jaw_size: required(obj, prefix, "jaw_size")?,
    };
    check_theta(submitted.theta, prefix)?;
    check_positive(submitted.opening, prefix, "opening")?;
    check_positive(submitted.jaw_size, prefix, "jaw_size")?;
    check_center(s, submitted.x, submitted.y, prefix)?;
    let res = s.scene.camera().resolution;
    let gripper = state.dataset.gripper();
    let jaw_m = gripper.resolve_jaw(submitted.jaw_size * res).map_err(|_| {
        let allowed: Vec<String> = gripper
            .jaw_sizes
            .iter()
            .map(|m| format!("{}", m / res))
            .collect();
        ApiError::validation(
            format!("{prefix}jaw_size"),
            format!("must be one of {} px in this scene", allowed.join(", ")),
        )
    })?;
    let grasp = Grasp::new(
        submitted.x,
        submitted.y,
        submitted.opening,
        submitted.jaw_size,
        submitted.theta,
    )
    .map_err(|e| ApiError::validation(prefix.trim_end_matches('.').to_string(), e.to_string()))?;
    Ok(TrialInput {
        submitted,
        grasp,
        jaw_m,
    })
}

fn client_tag(obj: &Map<String, Value>) -> Result<Option<String>, ApiError> {
    match obj.get("client") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(ApiError::validation("client", "must be a string")),
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Serialize)]
struct TrialResponse {
    success: bool,
    failure_reason: Option<FailureReason>,
    submission_id: u64,
}

/// Simulates and logs each input in order; runs on a blocking thread.
fn run_trials(
    state: &AppState,
    scene_id: &str,
    inputs: Vec<TrialInput>,
    client: Option<String>,
) -> Result<Vec<TrialResponse>, ApiError> {
    let s = scene(state, scene_id)?;
    let gripper = state.dataset.gripper();
    let mut out = Vec::with_capacity(inputs.len());
    for t in inputs {
        let outcome = simulate_grasp(&s.scene, &t.grasp, t.jaw_m, gripper)
            .map_err(|e| ApiError::internal("simulation", e.to_string()))?;
        let sub = state
            .log
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .append(now_ms(), scene_id, t.submitted, outcome, client.clone())
            .map_err(|e| {
                log::error!("{e}");
                ApiError::internal("storage", "submission could not be stored".into())
            })?;
        out.push(TrialResponse {
            success: outcome.success,
            failure_reason: outcome.failure_reason,
            submission_id: sub.submission_id,
        });
    }
    Ok(out)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal("internal", e.to_string()))?
}

async fn list_scenes(State(state): State<Arc<AppState>>) -> Json<Value> {
    let ids: Vec<&String> = state.dataset.scenes.keys().collect();
    Json(json!({ "scenes": ids }))
}

async fn scene_info(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Value> {
    let s = scene(&state, &id)?;
    let sc = &s.scene;
    Ok(Json(json!({
        "scene_id": sc.scene_id(),
        "scene_index": sc.scene_index(),
        "object": sc.object(),
        "pose": sc.pose(),
        "camera": sc.camera(),
        "seed": sc.seed(),
        "annotation_count": s.annotations.entries.len(),
        "annotation_lines": s.annotations.line_count(),
        "warning": s.annotations.warning(),
        "jaw_sizes_px": state
            .dataset
            .gripper()
            .jaw_sizes
            .iter()
            .map(|m| m / sc.camera().resolution)
            .collect::<Vec<_>>(),
    })))
}

async fn trial(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Value>, JsonRejection>,
) -> ApiResult<TrialResponse> {
    let s = scene(&state, &id)?;
    let Json(body) = body?;
    let input = parse_trial(&state, s, &body, "")?;
    let client = client_tag(object(&body, "")?)?;
    let st = state.clone();
    let mut out = blocking(move || run_trials(&st, &id, vec![input], client)).await?;
    Ok(Json(out.remove(0)))
}

async fn trial_batch(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Value>, JsonRejection>,
) -> ApiResult<Value> {
    let s = scene(&state, &id)?;
    let Json(body) = body?;
    let obj = object(&body, "")?;
    let client = client_tag(obj)?;
    let trials = obj
        .get("trials")
        .and_then(Value::as_array)
        .ok_or_else(|| ApiError::validation("trials", "must be an array"))?;
    let inputs = trials
        .iter()
        .enumerate()
        .map(|(i, t)| parse_trial(&state, s, t, &format!("trials[{i}].")))
        .collect::<Result<Vec<_>, _>>()?;
    let st = state.clone();
    let results = blocking(move || run_trials(&st, &id, inputs, client)).await?;
    let successes = results.iter().filter(|r| r.success).count();
    let total = results.len();
    Ok(Json(json!({
        "results": results,
        "total": total,
        "successes": successes,
        "accuracy": if total > 0 { Some(successes as f64 / total as f64) } else { None },
    })))
}

async fn rect_eval(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Value>, JsonRejection>,
) -> ApiResult<Value> {
    let s = scene(&state, &id)?;
    let Json(body) = body?;
    let obj = object(&body, "")?;
    let (x, y, theta, opening) = (
        required(obj, "", "x")?,
        required(obj, "", "y")?,
        required(obj, "", "theta")?,
        required(obj, "", "opening")?,
    );
    check_theta(theta, "")?;
    check_positive(opening, "", "opening")?;
    let res = s.scene.camera().resolution;
    let jaw = match number(obj, "", "jaw_size")? {
        Some(j) => {
            check_positive(j, "", "jaw_size")?;
            j
        }
        None => state.dataset.config.annotation.screening_jaw / res,
    };
    let defaults = RectCriterionConfig::default();
    let cfg = RectCriterionConfig {
        angle_thresh: number(obj, "", "angle_thresh")?.unwrap_or(defaults.angle_thresh),
        iou_thresh: number(obj, "", "iou_thresh")?.unwrap_or(defaults.iou_thresh),
    };
    if let Err(e) = cfg.validate() {
        let field = if cfg.angle_thresh > 0.0 && cfg.angle_thresh <= 90.0 {
            "iou_thresh"
        } else {
            "angle_thresh"
        };
        return Err(ApiError::validation(field, e.to_string()));
    }
    let pred = Grasp::new(x, y, opening, jaw, theta)
        .map_err(|e| ApiError::validation("body", e.to_string()))?;
    let gt = s.annotations.rectangles(res);
    let matched = rect_match(&pred, &gt, &cfg).map_err(|e| match e {
        CoreError::EmptyGroundTruth => ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            kind: "empty-ground-truth",
            field: None,
            message: format!("scene {id} has no annotations"),
        },
        other => ApiError::validation("body", other.to_string()),
    })?;
    Ok(Json(json!({
        "matched": matched.is_some(),
        "matched_index": matched,
        "angle_thresh": cfg.angle_thresh,
        "iou_thresh": cfg.iou_thresh,
    })))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<Value> {
    let log = state.log.lock().unwrap_or_else(|p| p.into_inner());
    let st = log.stats();
    let reasons: Map<String, Value> = FailureReason::ALL
        .iter()
        .map(|r| {
            (
                r.to_string(),
                json!(st.failure_reasons.get(r).copied().unwrap_or(0)),
            )
        })
        .collect();
    let scenes: Map<String, Value> = st
        .by_scene
        .iter()
        .map(|(id, t)| {
            (
                id.clone(),
                json!({ "trials": t.trials, "successes": t.successes, "success_rate": t.success_rate() }),
            )
        })
        .collect();
    Json(json!({
        "submissions": st.total.trials,
        "successes": st.total.successes,
        "success_rate": st.total.success_rate(),
        "failure_reasons": reasons,
        "scenes": scenes,
    }))
}
