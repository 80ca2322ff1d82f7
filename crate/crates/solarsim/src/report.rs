//! Journey exports: JSON document, fixed-width distance and daily-summary
//! tables, and per-step CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use solarsim_core::strategies::{SocMaintain, StrategyKind};
use solarsim_core::{EnergyBreakdown, JourneyLog, Strategy};

use crate::formats::{format_instant, format_time, PlanFile};
use crate::scenario::StrategyRun;

/// Kilometers rounded half up to an integer.
pub fn round_km(meters: f64) -> i64 {
    (meters / 1000.0 + 0.5).floor() as i64
}

/// Eight-point compass name of a direction in degrees.
pub fn compass8(deg: f64) -> &'static str {
    const NAMES: [&str; 8] = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"];
    let i = (deg.rem_euclid(360.0) / 45.0).round() as usize % 8;
    NAMES[i]
}

fn kwh(wh: f64) -> f64 {
    wh / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_kmh: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soc: Option<SocMaintain>,
}

impl StrategyParams {
    pub fn of(strategy: &Strategy) -> Self {
        let mut p = StrategyParams {
            speed_kmh: None,
            plan: None,
            soc: None,
        };
        match strategy {
            Strategy::MinSpeed(v) | Strategy::MaxSpeed(v) | Strategy::AverageSpeed(v) => p.speed_kmh = Some(*v),
            Strategy::DailyAverage(plan) => p.plan = Some(PlanFile::from_plan(plan)),
            Strategy::SocMaintain(c) => p.soc = Some(*c),
        }
        p
    }
}

/// Per-day columns, one entry per simulated day.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DailyArrays {
    pub day: Vec<u32>,
    pub distance_km: Vec<f64>,
    pub driven_hours: Vec<f64>,
    pub ghi_kwh_m2: Vec<f64>,
    pub max_temperature_c: Vec<f64>,
    pub wind_direction: Vec<String>,
    pub wind_direction_deg: Vec<f64>,
    pub wind_speed_ms: Vec<f64>,
    pub drag_kwh: Vec<f64>,
    pub rolling_kwh: Vec<f64>,
    pub gravitational_kwh: Vec<f64>,
    pub system_kwh: Vec<f64>,
    pub consumption_kwh: Vec<f64>,
    pub generation_kwh: Vec<f64>,
    pub spilled_kwh: Vec<f64>,
    pub end_battery_wh: Vec<f64>,
    pub depletion_events: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyKwh {
    pub drag: f64,
    pub rolling: f64,
    pub gravitational: f64,
    pub system: f64,
    pub consumption: f64,
    pub generation: f64,
    pub spilled: f64,
}

impl EnergyKwh {
    pub fn of(b: &EnergyBreakdown) -> Self {
        EnergyKwh {
            drag: kwh(b.drag),
            rolling: kwh(b.rolling),
            gravitational: kwh(b.gravitational),
            system: kwh(b.system),
            consumption: kwh(b.consumption_total),
            generation: kwh(b.charge),
            spilled: kwh(b.spilled),
        }
    }
}

/// Machine-readable result of one strategy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JourneyExport {
    pub strategy: StrategyKind,
    pub params: StrategyParams,
    pub route_km: f64,
    pub finished: bool,
    pub arrival_day: Option<u32>,
    pub arrival_time: Option<String>,
    pub daily: DailyArrays,
    pub totals_kwh: EnergyKwh,
    pub log: JourneyLog,
}

impl JourneyExport {
    pub fn new(run: &StrategyRun, route_length_m: f64) -> Self {
        let log = &run.log;
        let mut d = DailyArrays::default();
        for r in &log.days {
            d.day.push(r.day);
            d.distance_km.push(r.distance_m / 1000.0);
            d.driven_hours.push(r.driven_hours);
            d.ghi_kwh_m2.push(r.ghi_kwh_m2);
            d.max_temperature_c.push(r.max_temperature_c);
            d.wind_direction.push(compass8(r.wind_direction_deg).into());
            d.wind_direction_deg.push(r.wind_direction_deg);
            d.wind_speed_ms.push(r.mean_wind_speed_ms);
            let e = EnergyKwh::of(&r.breakdown);
            d.drag_kwh.push(e.drag);
            d.rolling_kwh.push(e.rolling);
            d.gravitational_kwh.push(e.gravitational);
            d.system_kwh.push(e.system);
            d.consumption_kwh.push(e.consumption);
            d.generation_kwh.push(e.generation);
            d.spilled_kwh.push(e.spilled);
            d.end_battery_wh.push(r.end_battery_wh);
            d.depletion_events.push(r.depletion_events);
        }
        JourneyExport {
            strategy: run.kind(),
            params: StrategyParams::of(&run.strategy),
            route_km: route_length_m / 1000.0,
            finished: log.finished,
            arrival_day: log.arrival_day,
            arrival_time: log.arrival_s.map(format_instant),
            daily: d,
            totals_kwh: EnergyKwh::of(&log.totals),
            log: log.clone(),
        }
    }
}

/// The JSON text both the CLI and the service emit for a run.
pub fn journey_json(export: &JourneyExport) -> String {
    let mut s = serde_json::to_string_pretty(export).expect("export serializes");
    s.push('\n');
    s
}

pub fn journeys_json(exports: &[JourneyExport]) -> String {
    let mut s = serde_json::to_string_pretty(exports).expect("exports serialize");
    s.push('\n');
    s
}

/// Strategy × day distance matrix in integer kilometers.
pub fn distance_table(runs: &[StrategyRun]) -> String {
    let days = runs.iter().map(|r| r.log.days.len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = write!(out, "{:<24}", "Plan");
    for d in 1..=days {
        let _ = write!(out, "{:>6}", format!("D{d}"));
    }
    let _ = writeln!(out, "{:>8}  {}", "Total", "Arrival");
    for run in runs {
        let _ = write!(out, "{:<24}", run.kind().label());
        for d in 0..days {
            match run.log.days.get(d) {
                Some(r) if r.distance_m > 0.0 || d == 0 => {
                    let _ = write!(out, "{:>6}", round_km(r.distance_m));
                }
                _ => {
                    let _ = write!(out, "{:>6}", "");
                }
            }
        }
        let arrival = match run.log.arrival_s {
            Some(s) => format_instant(s),
            None => "not reached".into(),
        };
        let _ = writeln!(out, "{:>8}  {}", round_km(run.log.total_distance_m), arrival);
    }
    out
}

/// Daily weather and energy summary of one run, energies in kWh.
pub fn daily_table(run: &StrategyRun) -> String {
    let days = &run.log.days;
    let mut out = String::new();
    let _ = write!(out, "{:<16}", "Data");
    for r in days {
        let _ = write!(out, "{:>9}", format!("Day{}", r.day));
    }
    out.push('\n');
    let mut row = |name: &str, cell: &dyn Fn(usize) -> String| {
        let _ = write!(out, "{name:<16}");
        for i in 0..days.len() {
            let _ = write!(out, "{:>9}", cell(i));
        }
        out.push('\n');
    };
    row("GHI", &|i| format!("{:.3}", days[i].ghi_kwh_m2));
    row("Temperature", &|i| format!("{:.1}", days[i].max_temperature_c));
    row("Wind direction", &|i| compass8(days[i].wind_direction_deg).to_string());
    row("Wind speed", &|i| format!("{:.1}", days[i].mean_wind_speed_ms));
    row("Drag", &|i| format!("{:.3}", kwh(days[i].breakdown.drag)));
    row("Rolling", &|i| format!("{:.3}", kwh(days[i].breakdown.rolling)));
    row("Gravitational", &|i| format!("{:.3}", kwh(days[i].breakdown.gravitational)));
    row("Consumption", &|i| format!("{:.3}", kwh(days[i].breakdown.consumption_total)));
    row("Generation", &|i| format!("{:.3}", kwh(days[i].breakdown.charge)));
    out
}

/// Both tables for a set of runs.
pub fn text_report(runs: &[StrategyRun]) -> String {
    let mut out = distance_table(runs);
    for run in runs {
        let _ = write!(out, "\n{}\n{}", run.kind().label(), daily_table(run));
    }
    out
}

#[derive(Debug, Serialize)]
struct StepRow<'a> {
    strategy: &'a str,
    hour: String,
    duration_s: i64,
    day: u32,
    commanded_speed_kmh: u32,
    distance_m: f64,
    driven_hours: f64,
    drag_wh: f64,
    rolling_wh: f64,
    gravitational_wh: f64,
    system_wh: f64,
    consumption_wh: f64,
    charge_wh: f64,
    spilled_wh: f64,
    battery_before_wh: f64,
    battery_wh: f64,
    odometer_m: f64,
    zone: &'a str,
    ghi_wm2: Option<f64>,
    temp_c: Option<f64>,
    wind_dir_deg: Option<f64>,
    wind_ms: Option<f64>,
    events: String,
}

/// Every step of every run, one CSV row each.
pub fn steps_csv(runs: &[StrategyRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for run in runs {
        for s in &run.log.steps {
            let b = &s.breakdown;
            let events: Vec<String> = s
                .events
                .iter()
                .map(|e| serde_json::to_value(e).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
                .collect();
            let row = StepRow {
                strategy: run.kind().name(),
                hour: format_time(s.hour),
                duration_s: s.duration_s,
                day: s.day_index,
                commanded_speed_kmh: s.commanded_speed_kmh,
                distance_m: s.distance_m,
                driven_hours: s.driven_hours,
                drag_wh: b.drag,
                rolling_wh: b.rolling,
                gravitational_wh: b.gravitational,
                system_wh: b.system,
                consumption_wh: b.consumption_total,
                charge_wh: b.charge,
                spilled_wh: b.spilled,
                battery_before_wh: s.battery_before_wh,
                battery_wh: s.battery_wh,
                odometer_m: s.odometer_m,
                zone: s.weather.as_ref().map_or("", |w| w.zone.as_str()),
                ghi_wm2: s.weather.as_ref().map(|w| w.ghi),
                temp_c: s.weather.as_ref().map(|w| w.temperature),
                wind_dir_deg: s.weather.as_ref().map(|w| w.wind_direction),
                wind_ms: s.weather.as_ref().map(|w| w.wind_speed),
                events: events.join("|"),
            };
            w.serialize(row).expect("csv row serializes");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}
