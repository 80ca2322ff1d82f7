//! Fixture paths, toy inputs and an in-process HTTP client.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use solarsim::service::{router, Service};
use tower::ServiceExt;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/wsc")
}

pub fn fixture(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Two-zone route of roughly `km` km along the equator with a gentle hill.
pub fn toy_route_json(km: f64) -> String {
    let deg = km * 1000.0 / 6_371_000.0 * 180.0 / std::f64::consts::PI;
    let alts = [10.0, 60.0, 120.0, 40.0, 15.0];
    let nodes: Vec<Value> = (0..=4)
        .map(|i| {
            json!({
                "lat": 0.0,
                "lon": deg * i as f64 / 4.0,
                "alt_m": alts[i],
                "name": format!("p{i}"),
                "zone": if i < 2 { "west" } else { "east" },
            })
        })
        .collect();
    serde_json::to_string(&nodes).unwrap()
}

/// `days` days of hourly weather from 2023-10-22 for the toy zones.
pub fn toy_weather_jsonl(days: u32, peak_ghi: f64) -> String {
    let mut out = String::new();
    for zone in ["west", "east"] {
        for d in 0..days {
            for h in 0..24 {
                let x = (h as f64 + 0.5 - 6.0) / 12.0;
                let ghi = if (0.0..1.0).contains(&x) { peak_ghi * (std::f64::consts::PI * x).sin() } else { 0.0 };
                let line = json!({
                    "zone": zone,
                    "time": format!("2023-10-{:02}T{h:02}:00", 22 + d),
                    "ghi_wm2": (ghi * 1000.0).round() / 1000.0,
                    "temp_c": 18.0 + 8.0 * (h as f64 / 24.0),
                    "wind_dir_deg": (40.0 * d as f64 + 7.0 * h as f64) % 360.0,
                    "wind_ms": 2.0 + (h % 5) as f64 * 0.5,
                });
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
    }
    out
}

pub fn toy_vehicle() -> Value {
    json!({
        "panel_area": 5.0,
        "panel_efficiency": 0.24,
        "system_efficiency": 0.9,
        "mass": 320.0,
        "drag_coefficient": 0.11,
        "frontal_area": 0.9,
        "rolling_resistance": 0.007,
        "battery_capacity": 4000.0,
        "constant_power_loss": 40.0,
        "panel_temp_coefficient": 0.0016,
    })
}

pub fn fixture_vehicle() -> Value {
    let spec = solarsim::formats::load_vehicle(&fixture("vehicle.toml")).unwrap();
    serde_json::to_value(spec).unwrap()
}

pub fn fixture_config() -> Value {
    let cfg = solarsim::scenario::RunConfig::load(&fixture("scenario.toml")).unwrap();
    serde_json::to_value(cfg).unwrap()
}

/// In-process client over the router.
pub struct Client {
    pub svc: Arc<Service>,
    app: axum::Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

impl Client {
    pub fn open(dir: &Path) -> Client {
        let svc = Arc::new(Service::open(dir).unwrap());
        Client {
            app: router(svc.clone()),
            svc,
        }
    }

    pub async fn call(&self, method: &str, uri: &str, body: Option<(&str, String)>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some((ct, text)) => {
                req = req.header("content-type", ct);
                Body::from(text)
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        Reply {
            status,
            text: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.call("GET", uri, None).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> Reply {
        self.call("POST", uri, Some(("application/json", body.to_string()))).await
    }

    pub async fn post_text(&self, uri: &str, content_type: &str, text: String) -> Reply {
        self.call("POST", uri, Some((content_type, text))).await
    }

    /// Ingests route and weather, returning their ids.
    pub async fn ingest(&self, route: String, weather: String) -> (String, String) {
        let r = self.post_text("/routes", "application/json", route).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        let w = self.post_text("/weather", "application/x-ndjson", weather).await;
        assert_eq!(w.status, StatusCode::CREATED, "{}", w.text);
        (
            r.json()["route_id"].as_str().unwrap().to_string(),
            w.json()["weather_id"].as_str().unwrap().to_string(),
        )
    }

    pub async fn create(&self, body: Value) -> Value {
        let r = self.post("/sessions", body).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        r.json()
    }
}
