//! On-disk formats: route JSON/CSV, weather JSONL, vehicle TOML, plan JSON
//! and local wall-clock timestamps.

use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use solarsim_core::energy::FieldError;
use solarsim_core::geo::RouteError;
use solarsim_core::planner::SpeedPlan;
use solarsim_core::weather::WeatherError;
use solarsim_core::{Route, RouteNode, SimTime, VehicleSpec, WeatherSample, WeatherSeries};

/// Minute-resolution timestamp layout used in every file and payload.
pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M";
const TIME_FORMAT_SECONDS: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{source_name}: record {record}: {message}")]
    Record {
        source_name: String,
        record: usize,
        message: String,
    },
    #[error("{source_name}: {message}")]
    Syntax { source_name: String, message: String },
    #[error("route: {0}")]
    Route(#[from] RouteError),
    #[error("weather: {0}")]
    Weather(#[from] WeatherError),
    #[error("invalid vehicle spec: {}", join(.0))]
    Vehicle(Vec<FieldError>),
}

fn join(errs: &[FieldError]) -> String {
    errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

impl FormatError {
    fn syntax(source_name: &str, message: impl ToString) -> Self {
        FormatError::Syntax {
            source_name: source_name.into(),
            message: message.to_string(),
        }
    }

    fn record(source_name: &str, record: usize, message: impl ToString) -> Self {
        FormatError::Record {
            source_name: source_name.into(),
            record,
            message: message.to_string(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_time(s: &str) -> Result<SimTime, String> {
    NaiveDateTime::parse_from_str(s, TIME_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, TIME_FORMAT_SECONDS))
        .map(|dt| SimTime(dt.and_utc().timestamp()))
        .map_err(|e| format!("bad timestamp {s:?} (expected YYYY-MM-DDThh:mm): {e}"))
}

pub fn format_time(t: SimTime) -> String {
    match DateTime::from_timestamp(t.0, 0) {
        Some(dt) => dt.naive_utc().format(TIME_FORMAT).to_string(),
        None => t.to_string(),
    }
}

/// Second-resolution rendering of a fractional instant.
pub fn format_instant(seconds: f64) -> String {
    match DateTime::from_timestamp(seconds.round() as i64, 0) {
        Some(dt) => dt.naive_utc().format(TIME_FORMAT_SECONDS).to_string(),
        None => format!("{seconds}s"),
    }
}

/// `"HH:MM"` to seconds since midnight; `"24:00"` is accepted.
pub fn parse_clock(s: &str) -> Result<i64, String> {
    let err = || format!("bad clock time {s:?} (expected HH:MM)");
    let (h, m) = s.split_once(':').ok_or_else(err)?;
    let h: i64 = h.parse().map_err(|_| err())?;
    let m: i64 = m.parse().map_err(|_| err())?;
    if !(0..=24).contains(&h) || !(0..60).contains(&m) || (h == 24 && m != 0) {
        return Err(err());
    }
    Ok(h * 3600 + m * 60)
}

pub fn format_clock(seconds: i64) -> String {
    format!("{:02}:{:02}", seconds / 3600, (seconds % 3600) / 60)
}

// Route

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteFormat {
    Json,
    Csv,
}

impl RouteFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => RouteFormat::Csv,
            _ => RouteFormat::Json,
        }
    }
}

pub fn parse_route_nodes(text: &str, format: RouteFormat, source_name: &str) -> Result<Vec<RouteNode>, FormatError> {
    match format {
        RouteFormat::Json => {
            let values: Vec<serde_json::Value> =
                serde_json::from_str(text).map_err(|e| FormatError::syntax(source_name, e))?;
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| serde_json::from_value(v).map_err(|e| FormatError::record(source_name, i, e)))
                .collect()
        }
        RouteFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
            let headers = reader.headers().map_err(|e| FormatError::syntax(source_name, e))?.clone();
            let expected = ["lat", "lon", "alt_m", "name", "zone"];
            if headers.iter().ne(expected.iter().copied()) {
                return Err(FormatError::syntax(
                    source_name,
                    format!("CSV header must be {}", expected.join(",")),
                ));
            }
            reader
                .deserialize()
                .enumerate()
                .map(|(i, r)| r.map_err(|e| FormatError::record(source_name, i, e)))
                .collect()
        }
    }
}

pub fn parse_route(text: &str, format: RouteFormat, source_name: &str) -> Result<Route, FormatError> {
    Ok(Route::from_nodes(parse_route_nodes(text, format, source_name)?)?)
}

pub fn load_route(path: &Path) -> Result<Route, FormatError> {
    let text = read_text(path)?;
    parse_route(&text, RouteFormat::from_path(path), &path.display().to_string())
}

/// Canonical JSON form of a route, the input to its content hash.
pub fn route_to_json(route: &Route) -> String {
    serde_json::to_string(route.nodes()).expect("route nodes serialize")
}

// Weather

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherRecord {
    pub zone: String,
    pub time: String,
    pub ghi_wm2: f64,
    pub temp_c: f64,
    pub wind_dir_deg: f64,
    pub wind_ms: f64,
}

impl WeatherRecord {
    pub fn from_sample(s: &WeatherSample) -> Self {
        WeatherRecord {
            zone: s.zone_id.clone(),
            time: format_time(s.timestamp),
            ghi_wm2: s.ghi,
            temp_c: s.temperature,
            wind_dir_deg: s.wind_direction,
            wind_ms: s.wind_speed,
        }
    }

    pub fn to_sample(&self) -> Result<WeatherSample, String> {
        let t = parse_time(&self.time)?;
        let whole_hour = DateTime::from_timestamp(t.0, 0).is_some_and(|d| d.minute() == 0 && d.second() == 0);
        if !whole_hour {
            return Err(format!("timestamp {:?} is not on a whole hour", self.time));
        }
        Ok(WeatherSample {
            zone_id: self.zone.clone(),
            timestamp: t,
            ghi: self.ghi_wm2,
            temperature: self.temp_c,
            wind_direction: self.wind_dir_deg,
            wind_speed: self.wind_ms,
        })
    }
}

/// Records of a JSONL document; record numbers in errors are 1-based lines.
pub fn parse_weather_samples(text: &str, source_name: &str) -> Result<Vec<WeatherSample>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: WeatherRecord = serde_json::from_str(line).map_err(|e| FormatError::record(source_name, i + 1, e))?;
        out.push(rec.to_sample().map_err(|e| FormatError::record(source_name, i + 1, e))?);
    }
    Ok(out)
}

pub fn parse_weather(text: &str, source_name: &str) -> Result<WeatherSeries, FormatError> {
    Ok(WeatherSeries::from_samples(parse_weather_samples(text, source_name)?)?)
}

pub fn load_weather(path: &Path) -> Result<WeatherSeries, FormatError> {
    let text = read_text(path)?;
    parse_weather(&text, &path.display().to_string())
}

/// Canonical JSONL form (zone-major, time-ascending), the input to its
/// content hash.
pub fn weather_to_jsonl(series: &WeatherSeries) -> String {
    let mut out = String::new();
    for s in series.samples() {
        out.push_str(&serde_json::to_string(&WeatherRecord::from_sample(s)).expect("record serializes"));
        out.push('\n');
    }
    out
}

// Vehicle

const VEHICLE_KEYS: [&str; 10] = [
    "panel_area",
    "panel_efficiency",
    "system_efficiency",
    "mass",
    "drag_coefficient",
    "frontal_area",
    "rolling_resistance",
    "battery_capacity",
    "constant_power_loss",
    "panel_temp_coefficient",
];

pub fn parse_vehicle(text: &str, source_name: &str) -> Result<VehicleSpec, FormatError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| FormatError::syntax(source_name, e))?;
    if let Some(k) = table.keys().find(|k| !VEHICLE_KEYS.contains(&k.as_str())) {
        return Err(FormatError::syntax(source_name, format!("unknown key `{k}`")));
    }
    let spec: VehicleSpec = table.try_into().map_err(|e| FormatError::syntax(source_name, e))?;
    spec.validate().map_err(FormatError::Vehicle)?;
    Ok(spec)
}

pub fn load_vehicle(path: &Path) -> Result<VehicleSpec, FormatError> {
    let text = read_text(path)?;
    parse_vehicle(&text, &path.display().to_string())
}

pub fn vehicle_to_toml(spec: &VehicleSpec) -> String {
    toml::to_string(spec).expect("vehicle spec serializes")
}

// Plan

/// Exchange form of a daily speed plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub daily_kmh: Vec<u32>,
    pub predicted_km: Vec<f64>,
    pub arrival_day: Option<u32>,
    /// Day index the first entry applies to.
    #[serde(default = "first_day")]
    pub start_day: u32,
}

fn first_day() -> u32 {
    1
}

impl PlanFile {
    pub fn from_plan(plan: &SpeedPlan) -> Self {
        PlanFile {
            daily_kmh: plan.daily_speeds_kmh.clone(),
            predicted_km: plan.predicted_daily_distances_km.clone(),
            arrival_day: plan.predicted_arrival.as_ref().map(|a| a.day),
            start_day: plan.start_day,
        }
    }
}

pub fn parse_plan(text: &str, source_name: &str) -> Result<PlanFile, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::syntax(source_name, e))
}
