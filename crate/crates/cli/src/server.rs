//! HTTP serve mode: one interactive [`Simulation`] behind a JSON API.
//!
//! `GET /state`, `GET /pareto`, `POST /select {plan_id}`, `POST /step`,
//! `GET /report` and `GET /config`. Stepping without a committed plan is a
//! 409 unless auto-select is enabled, in which case the step waits for the
//! deadline and commits the balanced plan.

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use slit_core::optimizer::Label;
use slit_core::sim::SessionError;
use slit_core::{Error, Simulation};
use tokio::time::Instant;

struct Session {
    sim: Simulation,
    /// When the current epoch became selectable; the auto-select clock.
    epoch_opened: Instant,
}

#[derive(Clone)]
pub struct AppState {
    session: Arc<Mutex<Session>>,
    /// Held for the whole of a step so only one runs at a time.
    stepping: Arc<tokio::sync::Mutex<()>>,
    config: Arc<Value>,
    auto_select_after: Option<Duration>,
}

impl AppState {
    pub fn new(sim: Simulation, auto_select_after: Option<Duration>) -> Self {
        let config = serde_json::from_str(&sim.config().to_json()).expect("config is valid JSON");
        Self {
            session: Arc::new(Mutex::new(Session {
                sim,
                epoch_opened: Instant::now(),
            })),
            stepping: Arc::new(tokio::sync::Mutex::new(())),
            config: Arc::new(config),
            auto_select_after,
        }
    }

    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs `f` on the session from the blocking pool; planning an epoch is
    /// CPU-bound.
    async fn with_session<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
    {
        let state = self.clone();
        tokio::task::spawn_blocking(move || f(&mut state.lock()))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?
            .map_err(ApiError::from)
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn internal(message: String) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Session(SessionError::UnknownPlan(_)) => StatusCode::NOT_FOUND,
            Error::Session(
                SessionError::NoSelection | SessionError::Finished(_) | SessionError::InteractiveRequiresOperator,
            ) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct SelectRequest {
    pub plan_id: u64,
}

#[derive(Debug, Serialize)]
struct SelectResponse {
    epoch: usize,
    committed: u64,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/pareto", get(get_pareto))
        .route("/select", post(post_select))
        .route("/step", post(post_step))
        .route("/report", get(get_report))
        .route("/config", get(get_config))
        .with_state(state)
}

async fn get_state(State(s): State<AppState>) -> Result<Response, ApiError> {
    let state = s.with_session(|ss| Ok(ss.sim.state())).await?;
    Ok(Json(state).into_response())
}

async fn get_pareto(State(s): State<AppState>) -> Result<Response, ApiError> {
    let view = s.with_session(|ss| ss.sim.pareto()).await?;
    Ok(Json(view).into_response())
}

async fn post_select(State(s): State<AppState>, Json(req): Json<SelectRequest>) -> Result<Response, ApiError> {
    let epoch = s
        .with_session(move |ss| {
            ss.sim.select(req.plan_id)?;
            Ok(ss.sim.epoch())
        })
        .await?;
    Ok(Json(SelectResponse {
        epoch,
        committed: req.plan_id,
    })
    .into_response())
}

async fn post_step(State(s): State<AppState>) -> Result<Response, ApiError> {
    let Ok(_guard) = s.stepping.clone().try_lock_owned() else {
        return Err(ApiError {
            status: StatusCode::CONFLICT,
            message: "a step is already in progress".into(),
        });
    };
    if let Some(wait) = s.auto_select_after {
        let (committed, opened) = s
            .with_session(|ss| {
                let committed = ss.sim.prepare()?.committed.is_some();
                Ok((committed, ss.epoch_opened))
            })
            .await?;
        if !committed {
            tokio::time::sleep_until(opened + wait).await;
            s.with_session(|ss| {
                if ss.sim.pending().and_then(|p| p.committed).is_none() {
                    ss.sim.select_label(Label::Balance)?;
                }
                Ok(())
            })
            .await?;
        }
    }
    let row = s
        .with_session(|ss| {
            let row = ss.sim.step()?.clone();
            ss.epoch_opened = Instant::now();
            Ok(row)
        })
        .await?;
    Ok(Json(row).into_response())
}

async fn get_report(State(s): State<AppState>) -> Result<Response, ApiError> {
    let report = s.with_session(|ss| Ok(ss.sim.report())).await?;
    Ok(Json(report).into_response())
}

async fn get_config(State(s): State<AppState>) -> Response {
    Json(s.config.as_ref().clone()).into_response()
}
