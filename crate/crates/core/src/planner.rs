//! Daily average-speed planning by filtered beam search.
//!
//! Layers are driving days. A node is the vehicle state at the end of a day
//! plus the speeds that led there; expanding a node simulates one whole day
//! at each candidate speed with the engine. A cheap energy bound discards
//! speeds that cannot avoid running the battery flat before the simulation
//! is attempted.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::energy::{charge_power, rolling_force, PhysicsConstants, VehicleSpec};
use crate::engine::{ConstantSpeed, Engine, EngineError, StepEvent, VehicleState, STEP_S};
use crate::time::SimTime;
use crate::weather::WeatherError;
use crate::{kmh_to_ms, HOUR_S, J_PER_WH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Objective {
    #[default]
    EarliestArrival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub beam_width: usize,
    /// Coarse search grid step, km/h.
    pub speed_grid_step_kmh: u32,
    pub horizon_days: u32,
    /// Run the ±`refine_radius_kmh` local pass on the engine's 1 km/h grid.
    pub refine: bool,
    pub refine_radius_kmh: u32,
    /// A day that empties the battery is discarded when it covers less than
    /// this fraction of its commanded distance.
    pub min_progress_fraction: f64,
    pub objective: Objective,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            beam_width: 50,
            speed_grid_step_kmh: 5,
            horizon_days: 10,
            refine: true,
            refine_radius_kmh: 2,
            min_progress_fraction: 0.5,
            objective: Objective::EarliestArrival,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanArrival {
    pub day: u32,
    /// Seconds since the epoch.
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedPlan {
    /// Session day index of the first planned day.
    pub start_day: u32,
    pub daily_speeds_kmh: Vec<u32>,
    pub predicted_daily_distances_km: Vec<f64>,
    pub predicted_arrival: Option<PlanArrival>,
    pub predicted_min_soc_wh: f64,
    /// The plan never empties the battery.
    pub feasible: bool,
    /// The plan stops at the horizon (or the weather's end) before arriving.
    pub horizon_truncated: bool,
}

impl SpeedPlan {
    /// Planned speed for a session day; days past the end reuse the last speed.
    pub fn speed_for_day(&self, day_index: u32) -> Option<u32> {
        let i = day_index.saturating_sub(self.start_day) as usize;
        self.daily_speeds_kmh
            .get(i)
            .or_else(|| self.daily_speeds_kmh.last())
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("nothing to plan: the journey is finished")]
    NothingToPlan,
    #[error("invalid planner config: {0}")]
    InvalidConfig(&'static str),
    #[error("infeasible horizon: no speed sequence avoids an empty battery")]
    InfeasibleHorizon { advisory: SpeedPlan },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Bounds on one day's weather over the interval a day expansion covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayWeatherSummary {
    pub max_ghi: f64,
    pub min_temperature: f64,
    pub max_temperature: f64,
    pub max_wind_speed: f64,
    /// Seconds of open charging window in the interval.
    pub charging_seconds: f64,
    /// Seconds available for driving steps.
    pub driving_seconds: f64,
}

/// Vehicle and route constants the pre-filter needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBounds {
    pub spec: VehicleSpec,
    pub physics: PhysicsConstants,
    /// Largest |incline| on the route, radians.
    pub max_abs_incline: f64,
    /// Highest minus lowest node altitude, meters.
    pub altitude_range: f64,
}

impl FilterBounds {
    pub fn from_engine(engine: &Engine<'_>) -> Self {
        let route = engine.route();
        let max_abs_incline = route
            .segments()
            .iter()
            .map(|s| s.incline.abs())
            .fold(0.0, f64::max);
        let (lo, hi) = route.altitude_range();
        FilterBounds {
            spec: engine.spec().clone(),
            physics: *engine.physics(),
            max_abs_incline,
            altitude_range: hi - lo,
        }
    }
}

/// Keeps `speed_kmh` unless even the most favourable weather and terrain
/// cannot fund a day at that speed without emptying the battery.
pub fn feasibility_filter(
    bounds: &FilterBounds,
    speed_kmh: u32,
    day: &DayWeatherSummary,
    battery_wh: f64,
    remaining_m: f64,
) -> bool {
    if battery_wh.is_infinite() {
        return true;
    }
    let spec = &bounds.spec;
    let v = kmh_to_ms(speed_kmh as f64);
    if v <= 0.0 {
        return true;
    }
    let distance = remaining_m.min(v * day.driving_seconds).max(0.0);
    let hours_moving = distance / v / HOUR_S;

    let charge_max = charge_power(spec, day.max_ghi, day.min_temperature) * day.charging_seconds / HOUR_S;

    let rho_min = bounds
        .physics
        .density_at(day.max_temperature)
        .min(bounds.physics.density_at(day.min_temperature));
    let air = (v - day.max_wind_speed).max(0.0);
    let drag_min = 0.5 * spec.drag_coefficient * rho_min * spec.frontal_area * air * air * distance / J_PER_WH;
    let rolling_min = rolling_force(spec, &bounds.physics, bounds.max_abs_incline) * distance / J_PER_WH;
    let grav_min = -spec.mass * bounds.physics.gravity * bounds.altitude_range / J_PER_WH;
    let system_min = spec.constant_power_loss * hours_moving;
    let need_min = drag_min + rolling_min + grav_min + system_min;

    battery_wh + charge_max >= need_min
}

/// Weather bounds over `[from, until)` across every zone.
pub fn summarize_interval(engine: &Engine<'_>, from: SimTime, until: SimTime, driving_seconds: f64) -> DayWeatherSummary {
    let w = engine.weather();
    let mut s = DayWeatherSummary {
        max_ghi: 0.0,
        min_temperature: f64::INFINITY,
        max_temperature: f64::NEG_INFINITY,
        max_wind_speed: 0.0,
        charging_seconds: engine.config().charging_window.overlap_seconds(from, until) as f64,
        driving_seconds,
    };
    let mut h = from.hour_index();
    while SimTime::from_hours(h) < until {
        let t = SimTime::from_hours(h);
        for zi in 0..w.zones().len() {
            if let Ok(x) = w.sample_by_index(zi, t) {
                s.max_ghi = s.max_ghi.max(x.ghi);
                s.min_temperature = s.min_temperature.min(x.temperature);
                s.max_temperature = s.max_temperature.max(x.temperature);
                s.max_wind_speed = s.max_wind_speed.max(x.wind_speed);
            }
        }
        h += 1;
    }
    if !s.min_temperature.is_finite() {
        // No samples: nothing can be charged; temperature is irrelevant.
        s.min_temperature = 25.0;
        s.max_temperature = 25.0;
    }
    s
}

/// Outcome of one simulated day for a candidate speed.
#[derive(Debug, Clone)]
pub struct DayOutcome {
    pub state: VehicleState,
    pub distance_m: f64,
    pub commanded_m: f64,
    pub depleted: bool,
    pub min_battery_wh: f64,
}

/// Simulates the next driving day at a constant speed.
pub fn simulate_day(engine: &Engine<'_>, state: &VehicleState, speed_kmh: u32) -> Result<DayOutcome, EngineError> {
    let start = engine.next_driving_start(state.clock);
    let end = engine.config().driving_window.end_on(start.midnight());
    let steps = (end - start) / STEP_S;
    let remaining = engine.route().total_length() - state.odometer;
    let commanded_m = remaining.min(kmh_to_ms(speed_kmh as f64) * (steps * STEP_S) as f64);
    let (next, logs) = engine.run_day(state, &mut ConstantSpeed(speed_kmh))?;
    let depleted = logs.iter().any(|l| l.events.contains(&StepEvent::DepletedMidhour));
    let min_battery_wh = logs.iter().map(|l| l.battery_wh).fold(state.battery, f64::min);
    Ok(DayOutcome {
        distance_m: next.odometer - state.odometer,
        state: next,
        commanded_m,
        depleted,
        min_battery_wh,
    })
}

#[derive(Debug, Clone)]
struct Node {
    state: VehicleState,
    speeds: Vec<u32>,
    distances: Vec<f64>,
    min_battery: f64,
    depleted: bool,
}

/// Ranking key; smaller is better.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanScore {
    pub depleted: bool,
    pub finished: bool,
    /// Arrival instant for finished plans, negated equivalent progress otherwise.
    pub primary: f64,
    pub neg_battery: f64,
    pub speeds: Vec<u32>,
}

impl PlanScore {
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.depleted
            .cmp(&other.depleted)
            .then((!self.finished).cmp(&!other.finished))
            .then(self.primary.total_cmp(&other.primary))
            .then(self.neg_battery.total_cmp(&other.neg_battery))
            .then(self.speeds.cmp(&other.speeds))
    }
}

/// The planner's scoring of a simulated speed sequence. Finished plans rank
/// by arrival then remaining battery; unfinished ones by odometer plus stored
/// energy valued at `meters_per_wh`. Ties go to the lexicographically lower
/// (gentler) speed list.
pub fn score_of(state: &VehicleState, depleted: bool, speeds: &[u32], meters_per_wh: f64) -> PlanScore {
    let (finished, primary) = match state.arrived_at_s {
        Some(t) if state.finished => (true, t),
        _ => (false, -(state.odometer + state.battery * meters_per_wh)),
    };
    PlanScore {
        depleted,
        finished,
        primary,
        neg_battery: -state.battery,
        speeds: speeds.to_vec(),
    }
}

/// Distance per Wh on flat, still air at the middle of the speed range; the
/// exchange rate used to compare unfinished nodes.
pub fn reference_meters_per_wh(engine: &Engine<'_>) -> f64 {
    let cfg = engine.config();
    let v = kmh_to_ms((cfg.speed_min_kmh + cfg.speed_max_kmh) as f64 / 2.0);
    let spec = engine.spec();
    let phys = engine.physics();
    let force = 0.5 * spec.drag_coefficient * phys.air_density * spec.frontal_area * v * v
        + spec.mass * phys.gravity * spec.rolling_resistance
        + spec.constant_power_loss / v;
    J_PER_WH / force
}

/// Coarse search grid: `speed_min`, then every `step` km/h, always ending at
/// `speed_max`.
pub fn coarse_grid(engine: &Engine<'_>, cfg: &PlannerConfig) -> Vec<u32> {
    let c = engine.config();
    let mut g: Vec<u32> = (c.speed_min_kmh..=c.speed_max_kmh)
        .step_by(cfg.speed_grid_step_kmh as usize)
        .collect();
    if g.last() != Some(&c.speed_max_kmh) {
        g.push(c.speed_max_kmh);
    }
    g
}

fn validate(engine: &Engine<'_>, cfg: &PlannerConfig) -> Result<(), PlannerError> {
    if cfg.beam_width == 0 {
        return Err(PlannerError::InvalidConfig("beam_width must be >= 1"));
    }
    if cfg.speed_grid_step_kmh == 0 || !cfg.speed_grid_step_kmh.is_multiple_of(engine.config().speed_increment_kmh) {
        return Err(PlannerError::InvalidConfig(
            "speed_grid_step_kmh must be a positive multiple of the engine speed increment",
        ));
    }
    if cfg.horizon_days == 0 {
        return Err(PlannerError::InvalidConfig("horizon_days must be >= 1"));
    }
    if !(0.0..=1.0).contains(&cfg.min_progress_fraction) {
        return Err(PlannerError::InvalidConfig("min_progress_fraction must be in [0, 1]"));
    }
    Ok(())
}

/// Plans one constant speed per driving day from `state`.
pub fn plan_daily_speeds(engine: &Engine<'_>, state: &VehicleState, cfg: &PlannerConfig) -> Result<SpeedPlan, PlannerError> {
    if state.finished {
        return Err(PlannerError::NothingToPlan);
    }
    validate(engine, cfg)?;
    let grid = coarse_grid(engine, cfg);
    let best = beam_search(engine, state, cfg, &grid)?;
    let Some(best) = best else {
        return Err(PlannerError::InfeasibleHorizon {
            advisory: empty_plan(engine, state),
        });
    };
    let mut speeds = best.speeds;
    if cfg.refine {
        speeds = refine(engine, state, cfg, speeds)?;
    }
    let plan = evaluate_plan(engine, state, &speeds, cfg.horizon_days)?;
    if plan.feasible {
        Ok(plan)
    } else {
        Err(PlannerError::InfeasibleHorizon { advisory: plan })
    }
}

/// Plans the remaining route from a mid-journey state.
pub fn replan(engine: &Engine<'_>, state: &VehicleState, cfg: &PlannerConfig) -> Result<SpeedPlan, PlannerError> {
    plan_daily_speeds(engine, state, cfg)
}

fn empty_plan(engine: &Engine<'_>, state: &VehicleState) -> SpeedPlan {
    SpeedPlan {
        start_day: first_plan_day(engine, state),
        daily_speeds_kmh: Vec::new(),
        predicted_daily_distances_km: Vec::new(),
        predicted_arrival: None,
        predicted_min_soc_wh: state.battery,
        feasible: false,
        horizon_truncated: true,
    }
}

fn first_plan_day(engine: &Engine<'_>, state: &VehicleState) -> u32 {
    let start = engine.next_driving_start(state.clock);
    state.day_index + (start.day_number() - state.clock.day_number()) as u32
}

fn is_out_of_span(e: &EngineError) -> bool {
    matches!(e, EngineError::Weather(WeatherError::OutOfSpan { .. }))
}

/// Returns the best node found, or `None` when the first layer is empty.
fn beam_search(engine: &Engine<'_>, root: &VehicleState, cfg: &PlannerConfig, grid: &[u32]) -> Result<Option<Node>, PlannerError> {
    let bounds = FilterBounds::from_engine(engine);
    let mpw = reference_meters_per_wh(engine);
    let total = engine.route().total_length();
    let score = |n: &Node| score_of(&n.state, n.depleted, &n.speeds, mpw);

    let mut layer = alloc::vec![Node {
        state: root.clone(),
        speeds: Vec::new(),
        distances: Vec::new(),
        min_battery: root.battery,
        depleted: false,
    }];
    let mut completed: Vec<Node> = Vec::new();
    let mut last_layer: Vec<Node> = Vec::new();

    for _day in 0..cfg.horizon_days {
        let mut candidates: Vec<Node> = Vec::new();
        for node in &layer {
            let start = engine.next_driving_start(node.state.clock);
            let day = start.midnight();
            let drive_end = engine.config().driving_window.end_on(day);
            let close = engine.config().charging_window.end_on(day);
            let driving_seconds = ((drive_end - start) / STEP_S * STEP_S) as f64;
            let summary = summarize_interval(engine, node.state.clock, close, driving_seconds);
            let remaining = total - node.state.odometer;
            for &v in grid {
                if !feasibility_filter(&bounds, v, &summary, node.state.battery, remaining) {
                    continue;
                }
                let out = match simulate_day(engine, &node.state, v) {
                    Ok(o) => o,
                    Err(e) if is_out_of_span(&e) => continue,
                    Err(e) => return Err(e.into()),
                };
                if out.depleted && out.distance_m < cfg.min_progress_fraction * out.commanded_m {
                    continue;
                }
                let mut speeds = node.speeds.clone();
                speeds.push(v);
                let mut distances = node.distances.clone();
                distances.push(out.distance_m);
                let child = Node {
                    min_battery: node.min_battery.min(out.min_battery_wh),
                    depleted: node.depleted || out.depleted,
                    state: out.state,
                    speeds,
                    distances,
                };
                if child.state.finished {
                    completed.push(child);
                } else {
                    candidates.push(child);
                }
            }
        }
        if completed.iter().any(|n| !n.depleted) {
            break;
        }
        candidates.sort_by(|a, b| score(a).cmp_key(&score(b)));
        candidates.truncate(cfg.beam_width);
        if candidates.is_empty() {
            break;
        }
        last_layer = candidates.clone();
        layer = candidates;
    }

    let pick = |v: &[Node]| -> Option<Node> {
        v.iter()
            .min_by(|a, b| score(a).cmp_key(&score(b)))
            .cloned()
    };
    Ok(match pick(&completed) {
        Some(c) if !c.depleted => Some(c),
        found => {
            let partial = pick(&last_layer);
            match (found, partial) {
                (Some(c), Some(p)) => Some(if p.depleted { c } else { p }),
                (a, b) => a.or(b),
            }
        }
    })
}

/// Simulates a speed list day by day, stopping at arrival.
pub fn evaluate_plan(engine: &Engine<'_>, state: &VehicleState, speeds: &[u32], horizon_days: u32) -> Result<SpeedPlan, PlannerError> {
    let mut s = state.clone();
    let mut used = Vec::new();
    let mut distances = Vec::new();
    let mut min_soc = state.battery;
    let mut depleted = false;
    let mut exhausted = false;
    for &v in speeds.iter().take(horizon_days as usize) {
        if s.finished {
            break;
        }
        match simulate_day(engine, &s, v) {
            Ok(out) => {
                used.push(v);
                distances.push(out.distance_m / 1000.0);
                min_soc = min_soc.min(out.min_battery_wh);
                depleted |= out.depleted;
                s = out.state;
            }
            Err(e) if is_out_of_span(&e) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let predicted_arrival = match (s.finished, s.arrived_at_s) {
        (true, Some(t)) => Some(PlanArrival {
            day: state.day_index + (libm::floor(t / 86_400.0) as i64 - state.clock.day_number()) as u32,
            time_s: t,
        }),
        _ => None,
    };
    Ok(SpeedPlan {
        start_day: first_plan_day(engine, state),
        daily_speeds_kmh: used,
        predicted_daily_distances_km: distances,
        predicted_arrival,
        predicted_min_soc_wh: min_soc,
        feasible: !depleted,
        horizon_truncated: !s.finished || exhausted,
    })
}

fn plan_score(engine: &Engine<'_>, state: &VehicleState, speeds: &[u32], horizon: u32, mpw: f64) -> Result<(PlanScore, usize), PlannerError> {
    let mut s = state.clone();
    let mut depleted = false;
    let mut n = 0;
    for &v in speeds.iter().take(horizon as usize) {
        if s.finished {
            break;
        }
        match simulate_day(engine, &s, v) {
            Ok(out) => {
                depleted |= out.depleted;
                s = out.state;
                n += 1;
            }
            Err(e) if is_out_of_span(&e) => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((score_of(&s, depleted, &speeds[..n], mpw), n))
}

/// Coordinate descent on the engine grid within ±radius of each day's speed.
fn refine(engine: &Engine<'_>, state: &VehicleState, cfg: &PlannerConfig, mut speeds: Vec<u32>) -> Result<Vec<u32>, PlannerError> {
    let c = engine.config();
    let mpw = reference_meters_per_wh(engine);
    let (mut best, n) = plan_score(engine, state, &speeds, cfg.horizon_days, mpw)?;
    speeds.truncate(n);
    let r = cfg.refine_radius_kmh as i64;
    let inc = c.speed_increment_kmh as i64;
    for _pass in 0..4 {
        let mut improved = false;
        for i in 0..speeds.len() {
            let mut deltas: Vec<i64> = (1..=r / inc).flat_map(|k| [-k * inc, k * inc]).collect();
            deltas.sort_by_key(|d| (d.abs(), *d));
            for d in deltas {
                let v = speeds[i] as i64 + d;
                if v < c.speed_min_kmh as i64 || v > c.speed_max_kmh as i64 {
                    continue;
                }
                let mut cand = speeds.clone();
                cand[i] = v as u32;
                let (sc, n) = plan_score(engine, state, &cand, cfg.horizon_days, mpw)?;
                if sc.cmp_key(&best) == Ordering::Less {
                    cand.truncate(n);
                    best = sc;
                    speeds = cand;
                    improved = true;
                    break;
                }
            }
            if i + 1 >= speeds.len() {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(speeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::tests::example_spec;
    use crate::engine::SimConfig;
    use crate::geo::{Route, RouteNode, EARTH_RADIUS_M};
    use crate::weather::{WeatherSample, WeatherSeries};
    use alloc::vec;

    fn flat_route(km: f64) -> Route {
        let deg = (km * 1000.0 / EARTH_RADIUS_M).to_degrees();
        Route::from_nodes(vec![
            RouteNode::new(0.0, 0.0, 0.0, "a", "z"),
            RouteNode::new(0.0, deg, 0.0, "b", "z"),
        ])
        .unwrap()
    }

    fn weather(days: i64, peak: f64) -> WeatherSeries {
        let mut v = Vec::new();
        for h in 0..days * 24 {
            let hod = (h % 24) as f64;
            let ghi = if (6.0..19.0).contains(&hod) {
                peak * libm::sin(core::f64::consts::PI * (hod - 6.0) / 13.0)
            } else {
                0.0
            };
            v.push(WeatherSample {
                zone_id: "z".into(),
                timestamp: SimTime::from_hours(h),
                ghi: ghi.max(0.0),
                temperature: 25.0,
                wind_direction: 0.0,
                wind_speed: 0.0,
            });
        }
        WeatherSeries::from_samples(v).unwrap()
    }

    #[test]
    fn abundant_energy_plans_top_speed() {
        let r = flat_route(2000.0);
        let w = weather(6, 1000.0);
        let mut spec = example_spec();
        spec.panel_area = 400.0;
        spec.battery_capacity = 1e6;
        let cfg = SimConfig {
            start_time: SimTime::from_hours(8),
            ..Default::default()
        };
        let e = Engine::new(spec, PhysicsConstants::default(), &r, &w, cfg).unwrap();
        let s0 = e.new_session().unwrap();
        let plan = plan_daily_speeds(&e, &s0, &PlannerConfig::default()).unwrap();
        assert!(plan.daily_speeds_kmh.iter().all(|&v| v == 130), "{:?}", plan.daily_speeds_kmh);
        assert!(plan.feasible);
        assert!(plan.predicted_arrival.is_some());
    }

    #[test]
    fn finished_state_has_nothing_to_plan() {
        let r = flat_route(10.0);
        let w = weather(2, 1000.0);
        let cfg = SimConfig {
            start_time: SimTime::from_hours(8),
            ..Default::default()
        };
        let e = Engine::new(example_spec(), PhysicsConstants::default(), &r, &w, cfg).unwrap();
        let s0 = e.new_session().unwrap();
        let (s1, _) = e.step_hour(&s0, 60.0).unwrap();
        assert!(s1.finished);
        assert_eq!(replan(&e, &s1, &PlannerConfig::default()).unwrap_err(), PlannerError::NothingToPlan);
    }

    #[test]
    fn filter_extremes() {
        let bounds = FilterBounds {
            spec: example_spec(),
            physics: PhysicsConstants::default(),
            max_abs_incline: 0.0,
            altitude_range: 0.0,
        };
        let dark = DayWeatherSummary {
            max_ghi: 0.0,
            min_temperature: 20.0,
            max_temperature: 20.0,
            max_wind_speed: 0.0,
            charging_seconds: 12.5 * 3600.0,
            driving_seconds: 9.0 * 3600.0,
        };
        assert!(!feasibility_filter(&bounds, 130, &dark, 100.0, 1e7));
        assert!(feasibility_filter(&bounds, 130, &dark, f64::INFINITY, 1e7));
        assert!(feasibility_filter(&bounds, 130, &dark, 100.0, 0.0));
    }

    #[test]
    fn speed_for_day_indexing() {
        let p = SpeedPlan {
            start_day: 2,
            daily_speeds_kmh: vec![60, 70],
            predicted_daily_distances_km: vec![],
            predicted_arrival: None,
            predicted_min_soc_wh: 0.0,
            feasible: true,
            horizon_truncated: false,
        };
        assert_eq!(p.speed_for_day(2), Some(60));
        assert_eq!(p.speed_for_day(3), Some(70));
        assert_eq!(p.speed_for_day(9), Some(70));
        assert_eq!(p.speed_for_day(1), Some(60));
    }
}
