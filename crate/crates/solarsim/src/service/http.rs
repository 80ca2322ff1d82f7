//! axum routes over [`Service`]. Handlers parse bodies themselves so that
//! malformed JSON gets the standard error envelope, and run the synchronous
//! service calls on the blocking pool.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{
    AdvanceRequest, ApiError, CreateSession, ForecastQuery, LogQuery, PlanRequest, ProfileQuery, Service,
    SimulateRequest, StepRequest,
};
use crate::formats::RouteFormat;

type Svc = Arc<Service>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_text(status, serde_json::to_string(&self.envelope()).expect("envelope serializes"))
    }
}

fn json_text(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    json_text(status, serde_json::to_string(value).expect("response serializes"))
}

fn parse_body<T: DeserializeOwned + Default>(bytes: &Bytes, allow_empty: bool) -> Result<T, ApiError> {
    if allow_empty && bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

fn parse_query<T: DeserializeOwned + Default>(raw: Option<String>) -> Result<T, ApiError> {
    let Some(raw) = raw.filter(|q| !q.is_empty()) else {
        return Ok(T::default());
    };
    // Query values are numbers or plain words, so a JSON object rebuilt from
    // the pairs deserializes into the typed query.
    let mut map = serde_json::Map::new();
    for pair in raw.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        let value = serde_json::from_str::<serde_json::Value>(v)
            .ok()
            .filter(|v| v.is_number())
            .unwrap_or_else(|| serde_json::Value::String(v.to_string()));
        map.insert(k.to_string(), value);
    }
    serde_json::from_value(serde_json::Value::Object(map))
        .map_err(|e| ApiError::bad_request(format!("invalid query: {e}")))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(500, "internal_error", e.to_string()))?
}

fn body_text(bytes: &Bytes) -> Result<String, ApiError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))
}

fn route_format(headers: &HeaderMap, text: &str) -> RouteFormat {
    let ct = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    if ct.contains("csv") {
        RouteFormat::Csv
    } else if ct.contains("json") || text.trim_start().starts_with('[') {
        RouteFormat::Json
    } else {
        RouteFormat::Csv
    }
}

async fn post_route(State(svc): State<Svc>, headers: HeaderMap, body: Bytes) -> Response {
    let res = async {
        let text = body_text(&body)?;
        let format = route_format(&headers, &text);
        blocking(move || svc.ingest_route(&text, format)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::CREATED, &r),
        Err(e) => e.into_response(),
    }
}

async fn get_route(State(svc): State<Svc>, Path(id): Path<String>) -> Response {
    match blocking(move || svc.route_view(&id)).await {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn get_profile(State(svc): State<Svc>, Path(id): Path<String>, RawQuery(q): RawQuery) -> Response {
    let res = async {
        let q: ProfileQuery = parse_query(q)?;
        blocking(move || svc.route_profile(&id, q)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_weather(State(svc): State<Svc>, body: Bytes) -> Response {
    let res = async {
        let text = body_text(&body)?;
        blocking(move || svc.ingest_weather(&text)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::CREATED, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_session(State(svc): State<Svc>, body: Bytes) -> Response {
    let res = async {
        let payload: CreateSession =
            serde_json::from_slice(&body).map_err(|e| ApiError::new(422, "validation_error", format!("invalid session payload: {e}")))?;
        blocking(move || svc.create_session(payload)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::CREATED, &r),
        Err(e) => e.into_response(),
    }
}

async fn list_sessions(State(svc): State<Svc>) -> Response {
    json(StatusCode::OK, &serde_json::json!({ "sessions": svc.session_ids() }))
}

async fn get_state(State(svc): State<Svc>, Path(id): Path<String>) -> Response {
    match svc.state(&id) {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_step(State(svc): State<Svc>, Path(id): Path<String>, body: Bytes) -> Response {
    let res = async {
        let req: StepRequest = parse_body(&body, false)?;
        blocking(move || svc.step(&id, req)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_advance(State(svc): State<Svc>, Path(id): Path<String>, body: Bytes) -> Response {
    let res = async {
        let req: AdvanceRequest = parse_body(&body, true)?;
        blocking(move || svc.advance(&id, req)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_plan(State(svc): State<Svc>, Path(id): Path<String>, body: Bytes) -> Response {
    let res = async {
        let req: PlanRequest = parse_body(&body, true)?;
        blocking(move || svc.plan(&id, req)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn post_simulate(State(svc): State<Svc>, Path(id): Path<String>, body: Bytes) -> Response {
    let res = async {
        let req: SimulateRequest = parse_body(&body, true)?;
        blocking(move || svc.simulate(&id, req)).await
    }
    .await;
    match res {
        Ok(text) => json_text(StatusCode::OK, text),
        Err(e) => e.into_response(),
    }
}

async fn get_forecast(State(svc): State<Svc>, Path(id): Path<String>, RawQuery(q): RawQuery) -> Response {
    let res = async {
        let q: ForecastQuery = parse_query(q)?;
        blocking(move || svc.forecast(&id, q)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn get_log(State(svc): State<Svc>, Path(id): Path<String>, RawQuery(q): RawQuery) -> Response {
    let res = async {
        let q: LogQuery = parse_query(q)?;
        blocking(move || svc.log(&id, q)).await
    }
    .await;
    match res {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn fallback() -> Response {
    ApiError::new(404, "not_found", "no such endpoint").into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/routes", post(post_route))
        .route("/routes/{id}", get(get_route))
        .route("/routes/{id}/profile", get(get_profile))
        .route("/weather", post(post_weather))
        .route("/sessions", post(post_session).get(list_sessions))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/step", post(post_step))
        .route("/sessions/{id}/advance", post(post_advance))
        .route("/sessions/{id}/plan", post(post_plan))
        .route("/sessions/{id}/simulate", post(post_simulate))
        .route("/sessions/{id}/forecast", get(get_forecast))
        .route("/sessions/{id}/log", get(get_log))
        .fallback(fallback)
        .with_state(svc)
}
