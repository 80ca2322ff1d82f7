//! Event-sourced simulation sessions over the engine, planner and
//! strategies, persisted in a data directory and served over HTTP.
//!
//! Every mutating command is appended to its session's log together with its
//! outcome. Opening a data directory replays each log from the creation
//! record and checks the recomputed outcomes against the recorded ones.

mod http;
mod store;

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use solarsim_core::energy::FieldError;
use solarsim_core::engine::{EngineError, StepLog};
use solarsim_core::planner::PlannerError;
use solarsim_core::strategies::{StrategyError, StrategyKind};
use solarsim_core::weather::{forecast_along, ForecastEntry, WeatherError};
use solarsim_core::{PlannerConfig, Route, SimTime, SpeedPlan, Strategy, VehicleSpec, VehicleState, WeatherSeries};

use crate::formats::{self, FormatError, PlanFile, RouteFormat};
use crate::report::{self, JourneyExport};
use crate::scenario::{RunConfig, Scenario, ScenarioError};

pub use http::router;
pub use store::{Index, IndexEntry, Store};

/// Transport-level error: HTTP status plus the `{"code","message","details"}`
/// envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: u16, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: json!({}),
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(404, "not_found", format!("{what} {id:?} not found")).with_details(json!({ what: id }))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(400, "bad_request", message)
    }

    pub fn envelope(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "details": self.details })
    }
}

fn field_details(prefix: &str, fields: &[FieldError]) -> Value {
    let list: Vec<Value> = fields
        .iter()
        .map(|f| json!({ "field": format!("{prefix}{}", f.field), "reason": f.reason }))
        .collect();
    json!({ "fields": list })
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let msg = e.to_string();
        match &e {
            EngineError::InvalidSpec(f) => {
                ApiError::new(422, "validation_error", msg).with_details(field_details("vehicle.", f))
            }
            EngineError::InvalidPhysics(f) => {
                ApiError::new(422, "validation_error", msg).with_details(field_details("config.physics.", f))
            }
            EngineError::InvalidConfig(_) => ApiError::new(422, "validation_error", msg),
            EngineError::Setup(_) => ApiError::new(422, "setup_error", msg),
            EngineError::InvalidSpeed { speed, .. } => {
                ApiError::new(422, "invalid_speed", msg).with_details(json!({ "speed_kmh": speed }))
            }
            EngineError::Finished => ApiError::new(409, "session_finished", msg),
            EngineError::OutsideDrivingWindow { clock, next, window } => {
                ApiError::new(409, "outside_driving_window", msg).with_details(json!({
                    "clock": formats::format_time(*clock),
                    "next_driving_hour": formats::format_time(*next),
                    "window": {
                        "start": formats::format_clock(window.0.start_s),
                        "end": formats::format_clock(window.0.end_s),
                    },
                }))
            }
            EngineError::TimeInPast { clock, until } => ApiError::new(409, "time_in_past", msg).with_details(json!({
                "clock": formats::format_time(*clock),
                "until": formats::format_time(*until),
            })),
            EngineError::Weather(WeatherError::OutOfSpan { .. }) => ApiError::new(422, "weather_out_of_span", msg),
            EngineError::Weather(_) => ApiError::new(422, "weather_error", msg),
        }
    }
}

impl From<PlannerError> for ApiError {
    fn from(e: PlannerError) -> Self {
        let msg = e.to_string();
        match e {
            PlannerError::NothingToPlan => ApiError::new(409, "session_finished", msg),
            PlannerError::InvalidConfig(_) => ApiError::new(422, "validation_error", msg),
            PlannerError::InfeasibleHorizon { advisory } => ApiError::new(422, "infeasible_horizon", msg)
                .with_details(json!({ "advisory": advisory })),
            PlannerError::Engine(e) => e.into(),
        }
    }
}

impl From<StrategyError> for ApiError {
    fn from(e: StrategyError) -> Self {
        let msg = e.to_string();
        match e {
            StrategyError::InvalidConfig(_) => ApiError::new(422, "validation_error", msg),
            StrategyError::NoFeasibleConstantSpeed { min_speed_outcome } => {
                ApiError::new(422, "infeasible", msg).with_details(json!({
                    "min_speed_outcome": {
                        "finished": min_speed_outcome.finished,
                        "total_distance_m": min_speed_outcome.total_distance_m,
                        "depletion_events": min_speed_outcome.depletion_events,
                    }
                }))
            }
            StrategyError::Engine(e) => e.into(),
        }
    }
}

impl From<FormatError> for ApiError {
    fn from(e: FormatError) -> Self {
        let details = match &e {
            FormatError::Vehicle(f) => field_details("vehicle.", f),
            FormatError::Record { record, .. } => json!({ "record": record }),
            _ => json!({}),
        };
        ApiError::new(422, "validation_error", e.to_string()).with_details(details)
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Config(m) => ApiError::new(422, "validation_error", format!("invalid config: {m}")),
            ScenarioError::Format(e) => e.into(),
            ScenarioError::Engine(e) => e.into(),
            ScenarioError::Planner(e) => e.into(),
            ScenarioError::Strategy(e) => e.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("data directory: {0}")]
    Io(#[from] io::Error),
    #[error("replay of session {session_id} diverged at event {seq}: {reason}")]
    ReplayMismatch {
        session_id: String,
        seq: u64,
        reason: String,
    },
}

// Wire types

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub vehicle: VehicleSpec,
    pub route_id: String,
    pub weather_id: String,
    #[serde(default)]
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyKind>,
}

/// A state-changing command as stored in the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    Create {
        session_id: String,
        payload: Box<CreateSession>,
    },
    Step {
        speed_kmh: f64,
    },
    Advance {
        until: SimTime,
    },
    Plan {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        planner: Option<PlannerConfig>,
        /// Explicit speeds to evaluate instead of searching.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        daily_kmh: Option<Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Created,
    Step { log: StepLog },
    Advance { logs: Vec<StepLog> },
    Plan { plan: SpeedPlan },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// 0 for the creation record, then consecutive.
    pub seq: u64,
    pub command: Command,
    pub outcome: Outcome,
    /// Vehicle state after the command.
    pub state: VehicleState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub session_id: String,
    /// Number of committed events; cite it as `version` in mutating requests.
    pub version: u64,
    pub clock: String,
    pub day: u32,
    pub battery_wh: f64,
    pub soc_fraction: f64,
    pub odometer_km: f64,
    pub remaining_km: f64,
    pub finished: bool,
    pub can_drive: bool,
    pub next_driving_hour: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SpeedPlan>,
    pub state: VehicleState,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    pub speed_kmh: f64,
    #[serde(default)]
    pub version: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvanceRequest {
    /// `YYYY-MM-DDThh:mm`; defaults to the next driving-window opening.
    #[serde(default)]
    pub until: Option<String>,
    #[serde(default)]
    pub version: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    #[serde(default)]
    pub planner: Option<PlannerConfig>,
    #[serde(default)]
    pub daily_kmh: Option<Vec<u32>>,
    #[serde(default)]
    pub version: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    #[serde(default)]
    pub strategy: Option<StrategyKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastQuery {
    pub hours: Option<u32>,
    pub speed_kmh: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogQuery {
    pub from: Option<u64>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub state: StateSnapshot,
    pub log: StepLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvanceResponse {
    pub state: StateSnapshot,
    pub logs: Vec<StepLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub state: StateSnapshot,
    pub plan: SpeedPlan,
    pub plan_file: PlanFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResponse {
    /// Future weather from the loaded series, not a degraded prediction.
    pub label: String,
    pub assumed_speed_kmh: f64,
    pub entries: Vec<ForecastEntry>,
    pub span_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPage {
    pub session_id: String,
    pub version: u64,
    pub events: Vec<EventRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedRoute {
    pub route_id: String,
    pub nodes: usize,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedWeather {
    pub weather_id: String,
    pub zones: Vec<String>,
    pub first_hour: String,
    pub last_hour: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileQuery {
    /// Defaults to the route start.
    pub from_m: Option<f64>,
    /// Defaults to the route end.
    pub to_m: Option<f64>,
    /// Defaults to 1,000 m.
    pub every_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub distance_m: f64,
    pub altitude_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteView {
    pub route_id: String,
    pub nodes: Vec<solarsim_core::RouteNode>,
    pub cumulative_m: Vec<f64>,
    pub length_m: f64,
}

// Sessions

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub payload: CreateSession,
    pub scenario: Arc<Scenario>,
    pub state: VehicleState,
    pub plan: Option<SpeedPlan>,
    pub version: u64,
}

impl Session {
    pub fn snapshot(&self) -> StateSnapshot {
        let engine = self.scenario.engine();
        let s = &self.state;
        let total = self.scenario.route.total_length();
        StateSnapshot {
            session_id: self.id.clone(),
            version: self.version,
            clock: formats::format_time(s.clock),
            day: s.day_index,
            battery_wh: s.battery,
            soc_fraction: s.battery / self.scenario.spec.battery_capacity,
            odometer_km: s.odometer / 1000.0,
            remaining_km: (total - s.odometer).max(0.0) / 1000.0,
            finished: s.finished,
            can_drive: !s.finished && engine.can_drive_at(s.clock),
            next_driving_hour: formats::format_time(engine.next_driving_start(s.clock)),
            strategy: self.payload.strategy,
            plan: self.plan.clone(),
            state: s.clone(),
        }
    }

    /// Runs `command` against this session, returning the successor and the
    /// event to record.
    fn apply(&self, command: Command) -> Result<(Session, EventRecord), ApiError> {
        let engine = self.scenario.engine();
        let mut next = self.clone();
        let outcome = match &command {
            Command::Create { .. } => return Err(ApiError::bad_request("session already created")),
            Command::Step { speed_kmh } => {
                let (state, log) = engine.step_hour(&self.state, *speed_kmh)?;
                next.state = state;
                Outcome::Step { log }
            }
            Command::Advance { until } => {
                let (state, logs) = engine.advance_idle(&self.state, *until)?;
                next.state = state;
                Outcome::Advance { logs }
            }
            Command::Plan { planner, daily_kmh } => {
                let plan = match daily_kmh {
                    Some(speeds) => self.scenario.evaluate(&self.state, speeds)?,
                    None => {
                        let cfg = planner.clone().unwrap_or_else(|| self.scenario.config.planner.clone());
                        self.scenario.plan(&self.state, &cfg)?
                    }
                };
                next.plan = Some(plan.clone());
                Outcome::Plan { plan }
            }
        };
        next.version += 1;
        let record = EventRecord {
            seq: self.version,
            command,
            outcome,
            state: next.state.clone(),
        };
        Ok((next, record))
    }
}

struct SessionSlot {
    /// Serializes writers; readers use `current` only.
    writer: Mutex<()>,
    current: RwLock<Arc<Session>>,
}

#[derive(Default)]
struct Registry {
    routes: HashMap<String, Arc<Route>>,
    weather: HashMap<String, Arc<WeatherSeries>>,
    sessions: BTreeMap<String, Arc<SessionSlot>>,
    index: Index,
}

pub struct Service {
    store: Store,
    registry: Mutex<Registry>,
}

fn content_id(prefix: &str, canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    format!("{prefix}{}", hex::encode(digest))
}

fn session_id(payload: &CreateSession, ordinal: usize) -> String {
    let canonical = serde_json::to_string(payload).expect("payload serializes");
    let digest = Sha256::digest(format!("{ordinal}\n{canonical}").as_bytes());
    format!("s{ordinal:05}-{}", &hex::encode(digest)[..16])
}

fn check_version(session: &Session, cited: Option<u64>) -> Result<(), ApiError> {
    match cited {
        Some(v) if v != session.version => Err(ApiError::new(
            409,
            "stale_version",
            format!("version {v} is stale; the session is at version {}", session.version),
        )
        .with_details(json!({ "current_version": session.version, "cited_version": v }))),
        _ => Ok(()),
    }
}

impl Service {
    /// Opens (creating if needed) a data directory and replays every session.
    pub fn open(data_dir: &Path) -> Result<Self, ServiceError> {
        let store = Store::open(data_dir)?;
        let index = store.read_index()?;
        let svc = Service {
            store,
            registry: Mutex::new(Registry::default()),
        };
        for entry in &index.sessions {
            let session = svc.replay(entry)?;
            let mut reg = svc.registry.lock().expect("registry lock");
            reg.sessions.insert(
                session.id.clone(),
                Arc::new(SessionSlot {
                    writer: Mutex::new(()),
                    current: RwLock::new(Arc::new(session)),
                }),
            );
        }
        svc.registry.lock().expect("registry lock").index = index;
        Ok(svc)
    }

    pub fn data_dir(&self) -> &Path {
        self.store.root()
    }

    fn replay(&self, entry: &IndexEntry) -> Result<Session, ServiceError> {
        let mismatch = |seq: u64, reason: String| ServiceError::ReplayMismatch {
            session_id: entry.session_id.clone(),
            seq,
            reason,
        };
        let events = self.store.read_events(&entry.session_id)?;
        let Some(first) = events.first() else {
            return Err(mismatch(0, "empty event log".into()));
        };
        let Command::Create { session_id, payload } = &first.command else {
            return Err(mismatch(0, "log does not start with a create record".into()));
        };
        let mut session = self
            .build_session(session_id.clone(), (**payload).clone())
            .map_err(|e| mismatch(0, e.message))?;
        if session.state != first.state {
            return Err(mismatch(0, "initial state differs".into()));
        }
        for ev in &events[1..] {
            let (next, record) = session.apply(ev.command.clone()).map_err(|e| mismatch(ev.seq, e.message))?;
            if &record != ev {
                return Err(mismatch(ev.seq, "recomputed event differs from the recorded one".into()));
            }
            session = next;
        }
        Ok(session)
    }

    fn route(&self, id: &str) -> Result<Arc<Route>, ApiError> {
        if let Some(r) = self.registry.lock().expect("registry lock").routes.get(id) {
            return Ok(r.clone());
        }
        let text = self.store.route_text(id).map_err(|_| ApiError::not_found("route_id", id))?;
        let route = Arc::new(formats::parse_route(&text, RouteFormat::Json, id)?);
        self.registry
            .lock()
            .expect("registry lock")
            .routes
            .insert(id.into(), route.clone());
        Ok(route)
    }

    fn weather(&self, id: &str) -> Result<Arc<WeatherSeries>, ApiError> {
        if let Some(w) = self.registry.lock().expect("registry lock").weather.get(id) {
            return Ok(w.clone());
        }
        let text = self.store.weather_text(id).map_err(|_| ApiError::not_found("weather_id", id))?;
        let w = Arc::new(formats::parse_weather(&text, id)?);
        self.registry
            .lock()
            .expect("registry lock")
            .weather
            .insert(id.into(), w.clone());
        Ok(w)
    }

    fn build_session(&self, id: String, payload: CreateSession) -> Result<Session, ApiError> {
        let route = self.route(&payload.route_id)?;
        let weather = self.weather(&payload.weather_id)?;
        let scenario = Scenario::new(payload.vehicle.clone(), payload.config.clone(), route, weather)?;
        let state = scenario.initial_state()?;
        Ok(Session {
            id,
            payload,
            scenario: Arc::new(scenario),
            state,
            plan: None,
            version: 1,
        })
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.registry
            .lock()
            .expect("registry lock")
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn current(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        Ok(self.slot(id)?.current.read().expect("session lock").clone())
    }

    fn io_error(e: io::Error) -> ApiError {
        ApiError::new(500, "storage_error", e.to_string())
    }

    pub fn ingest_route(&self, body: &str, format: RouteFormat) -> Result<IngestedRoute, ApiError> {
        let route = formats::parse_route(body, format, "route")?;
        let canonical = formats::route_to_json(&route);
        let id = content_id("r-", &canonical);
        self.store.put_route(&id, &canonical).map_err(Self::io_error)?;
        let out = IngestedRoute {
            route_id: id.clone(),
            nodes: route.nodes().len(),
            length_m: route.total_length(),
        };
        self.registry
            .lock()
            .expect("registry lock")
            .routes
            .insert(id, Arc::new(route));
        Ok(out)
    }

    pub fn ingest_weather(&self, body: &str) -> Result<IngestedWeather, ApiError> {
        let series = formats::parse_weather(body, "weather")?;
        let canonical = formats::weather_to_jsonl(&series);
        let id = content_id("w-", &canonical);
        self.store.put_weather(&id, &canonical).map_err(Self::io_error)?;
        let out = IngestedWeather {
            weather_id: id.clone(),
            zones: series.zones().to_vec(),
            first_hour: formats::format_time(series.first_time()),
            last_hour: formats::format_time(series.last_time()),
        };
        self.registry
            .lock()
            .expect("registry lock")
            .weather
            .insert(id, Arc::new(series));
        Ok(out)
    }

    pub fn route_view(&self, id: &str) -> Result<RouteView, ApiError> {
        let r = self.route(id)?;
        Ok(RouteView {
            route_id: id.into(),
            nodes: r.nodes().to_vec(),
            cumulative_m: r.cumulative_distance().to_vec(),
            length_m: r.total_length(),
        })
    }

    pub fn route_profile(&self, id: &str, q: ProfileQuery) -> Result<Vec<ProfilePoint>, ApiError> {
        let r = self.route(id)?;
        let from = q.from_m.unwrap_or(0.0);
        let to = q.to_m.unwrap_or(r.total_length());
        let every = q.every_m.unwrap_or(1000.0);
        let points = r
            .elevation_profile(from, to, every)
            .map_err(|e| ApiError::new(422, "validation_error", e.to_string()))?;
        Ok(points
            .into_iter()
            .map(|(distance_m, altitude_m)| ProfilePoint { distance_m, altitude_m })
            .collect())
    }

    pub fn create_session(&self, payload: CreateSession) -> Result<StateSnapshot, ApiError> {
        if let Err(fields) = payload.vehicle.validate() {
            return Err(ApiError::from(EngineError::InvalidSpec(fields)));
        }
        // Hold the registry across id assignment so ordinals stay unique.
        let mut reg = self.registry.lock().expect("registry lock");
        let ordinal = reg.index.sessions.len();
        let id = session_id(&payload, ordinal);
        drop(reg);
        let session = self.build_session(id.clone(), payload.clone())?;
        let record = EventRecord {
            seq: 0,
            command: Command::Create {
                session_id: id.clone(),
                payload: Box::new(payload.clone()),
            },
            outcome: Outcome::Created,
            state: session.state.clone(),
        };
        reg = self.registry.lock().expect("registry lock");
        if reg.index.sessions.len() != ordinal {
            return Err(ApiError::new(409, "conflict", "concurrent session creation; retry"));
        }
        self.store.append_event(&id, &record).map_err(Self::io_error)?;
        reg.index.sessions.push(IndexEntry {
            session_id: id.clone(),
            route_id: payload.route_id.clone(),
            weather_id: payload.weather_id.clone(),
            created_at: chrono::DateTime::<chrono::Utc>::from(std::time::SystemTime::now()).to_rfc3339(),
        });
        self.store.write_index(&reg.index).map_err(Self::io_error)?;
        let snapshot = session.snapshot();
        reg.sessions.insert(
            id,
            Arc::new(SessionSlot {
                writer: Mutex::new(()),
                current: RwLock::new(Arc::new(session)),
            }),
        );
        Ok(snapshot)
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.registry
            .lock()
            .expect("registry lock")
            .sessions
            .keys()
            .cloned()
            .collect()
    }

    pub fn state(&self, id: &str) -> Result<StateSnapshot, ApiError> {
        Ok(self.current(id)?.snapshot())
    }

    /// Applies a command under the session's writer lock and persists it.
    fn mutate(&self, id: &str, version: Option<u64>, command: Command) -> Result<(Session, EventRecord), ApiError> {
        let slot = self.slot(id)?;
        let _guard = slot.writer.lock().expect("writer lock");
        let session = slot.current.read().expect("session lock").clone();
        check_version(&session, version)?;
        let (next, record) = session.apply(command)?;
        self.store.append_event(id, &record).map_err(Self::io_error)?;
        *slot.current.write().expect("session lock") = Arc::new(next.clone());
        Ok((next, record))
    }

    pub fn step(&self, id: &str, req: StepRequest) -> Result<StepResponse, ApiError> {
        let (next, record) = self.mutate(
            id,
            req.version,
            Command::Step {
                speed_kmh: req.speed_kmh,
            },
        )?;
        let Outcome::Step { log } = record.outcome else {
            unreachable!("step command yields a step outcome")
        };
        Ok(StepResponse {
            state: next.snapshot(),
            log,
        })
    }

    pub fn advance(&self, id: &str, req: AdvanceRequest) -> Result<AdvanceResponse, ApiError> {
        let current = self.current(id)?;
        let until = match &req.until {
            Some(t) => formats::parse_time(t).map_err(|e| ApiError::new(422, "validation_error", e))?,
            None => current.scenario.engine().next_driving_start(current.state.clock),
        };
        let (next, record) = self.mutate(id, req.version, Command::Advance { until })?;
        let Outcome::Advance { logs } = record.outcome else {
            unreachable!("advance command yields an advance outcome")
        };
        Ok(AdvanceResponse {
            state: next.snapshot(),
            logs,
        })
    }

    pub fn plan(&self, id: &str, req: PlanRequest) -> Result<PlanResponse, ApiError> {
        let (next, record) = self.mutate(
            id,
            req.version,
            Command::Plan {
                planner: req.planner,
                daily_kmh: req.daily_kmh,
            },
        )?;
        let Outcome::Plan { plan } = record.outcome else {
            unreachable!("plan command yields a plan outcome")
        };
        Ok(PlanResponse {
            state: next.snapshot(),
            plan_file: PlanFile::from_plan(&plan),
            plan,
        })
    }

    /// Whole-journey run from the session's current state. Read-only: the
    /// session and its log are untouched. Returns the export JSON text.
    pub fn simulate(&self, id: &str, req: SimulateRequest) -> Result<String, ApiError> {
        let session = self.current(id)?;
        let kind = req
            .strategy
            .or(session.payload.strategy)
            .ok_or_else(|| ApiError::new(422, "validation_error", "no strategy given and the session has none"))?;
        let sc = &session.scenario;
        let strategy = match (&session.plan, kind) {
            (Some(plan), StrategyKind::DailyAvg) => Strategy::DailyAverage(plan.clone()),
            _ => sc.strategy(kind, &session.state)?,
        };
        let run = sc.run_strategy(strategy, &session.state)?;
        Ok(report::journey_json(&JourneyExport::new(&run, sc.route.total_length())))
    }

    pub fn forecast(&self, id: &str, q: ForecastQuery) -> Result<ForecastResponse, ApiError> {
        let session = self.current(id)?;
        let sc = &session.scenario;
        let engine = sc.engine();
        let cfg = sc.sim_config();
        let s = &session.state;
        let speed = q.speed_kmh.unwrap_or_else(|| {
            let day = if engine.can_drive_at(s.clock) {
                s.day_index
            } else {
                s.day_index + (engine.next_driving_start(s.clock).day_number() - s.clock.day_number()) as u32
            };
            session
                .plan
                .as_ref()
                .and_then(|p| p.speed_for_day(day))
                .unwrap_or(cfg.speed_min_kmh) as f64
        });
        let start = engine.next_driving_start(s.clock);
        let window_end = cfg.driving_window.end_on(start.midnight());
        let remaining_hours = ((window_end - start) / 3600).max(0) as u32;
        let hours = q.hours.unwrap_or(remaining_hours).max(1);
        let f = forecast_along(&sc.route, &sc.weather, s.odometer, s.clock, speed, hours)
            .map_err(|e| ApiError::new(422, "validation_error", e.to_string()))?;
        Ok(ForecastResponse {
            label: "forecast".into(),
            assumed_speed_kmh: speed,
            entries: f.entries,
            span_exhausted: f.span_exhausted,
        })
    }

    pub fn log(&self, id: &str, q: LogQuery) -> Result<LogPage, ApiError> {
        let session = self.current(id)?;
        let events = self.store.read_events(id).map_err(Self::io_error)?;
        let from = q.from.unwrap_or(0) as usize;
        let limit = q.limit.unwrap_or(usize::MAX);
        let page: Vec<EventRecord> = events.iter().skip(from).take(limit).cloned().collect();
        let end = from + page.len();
        Ok(LogPage {
            session_id: id.into(),
            version: session.version,
            next: (end < events.len()).then_some(end as u64),
            events: page,
        })
    }

    /// The stored event log text of a session.
    pub fn raw_log(&self, id: &str) -> Result<String, ApiError> {
        self.slot(id)?;
        self.store.event_log_text(id).map_err(Self::io_error)
    }
}

/// Serves the HTTP API until interrupted.
pub async fn serve(listen: &str, data_dir: &Path) -> io::Result<()> {
    let svc = Arc::new(Service::open(data_dir).map_err(io::Error::other)?);
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("solarsim service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use solarsim_core::engine::WindowLabel;
    use solarsim_core::time::DailyWindow;

    #[test]
    fn window_conflict_maps_to_409_with_next_hour() {
        let e = EngineError::OutsideDrivingWindow {
            clock: SimTime::from_hours(7),
            next: SimTime::from_hours(8),
            window: WindowLabel(DailyWindow::new(8 * 3600, 17 * 3600)),
        };
        let api = ApiError::from(e);
        assert_eq!((api.status, api.code), (409, "outside_driving_window"));
        assert!(api.message.contains("driving is permitted from 08:00 to 17:00"));
        assert_eq!(api.details["next_driving_hour"], "1970-01-01T08:00");
        assert_eq!(api.details["window"]["end"], "17:00");
    }

    #[test]
    fn spec_field_errors_get_a_vehicle_prefix() {
        let api = ApiError::from(EngineError::InvalidSpec(vec![FieldError {
            field: "mass",
            reason: "must be > 0",
        }]));
        assert_eq!(api.status, 422);
        assert_eq!(api.details["fields"][0]["field"], "vehicle.mass");
        assert_eq!(
            api.envelope().as_object().unwrap().keys().collect::<Vec<_>>(),
            ["code", "details", "message"]
        );
    }

    #[test]
    fn content_ids_depend_only_on_content() {
        assert_eq!(content_id("r-", "abc"), content_id("r-", "abc"));
        assert_ne!(content_id("r-", "abc"), content_id("r-", "abd"));
        assert_eq!(content_id("w-", "").len(), 2 + 64);
    }

    #[test]
    fn command_wire_format_is_tagged() {
        let c = Command::Step { speed_kmh: 61.0 };
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"type":"step","speed_kmh":61.0}"#);
        let back: Command = serde_json::from_str(r#"{"type":"advance","until":3600}"#).unwrap();
        assert_eq!(back, Command::Advance { until: SimTime::from_hours(1) });
    }
}
