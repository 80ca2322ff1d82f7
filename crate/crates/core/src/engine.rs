//! Hour-by-hour journey engine.
//!
//! Within a step the environment is frozen at each zone's sample for the
//! hour, so battery energy is piecewise linear in time. The integrator cuts
//! each step into pieces at segment ends, hour boundaries, window boundaries
//! and `max_substep_s`, and applies the exact linear update on each piece.
//! Depletion is solved analytically inside the piece where it happens.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{
    charge_power, drag_force, effective_gravitational_energy, headwind_component, rolling_force,
    EnergyBreakdown, FieldError, PhysicsConstants, VehicleSpec,
};
use crate::geo::Route;
use crate::time::{DailyWindow, SimTime, DAY_S};
use crate::weather::{WeatherError, WeatherSeries};
use crate::{kmh_to_ms, HOUR_S, J_PER_WH};

/// Length of one simulation step, seconds.
pub const STEP_S: i64 = 3600;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid vehicle spec: {}", join_fields(.0))]
    InvalidSpec(Vec<FieldError>),
    #[error("invalid physics constants: {}", join_fields(.0))]
    InvalidPhysics(Vec<FieldError>),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("setup error: {0}")]
    Setup(String),
    #[error("invalid speed {speed} km/h: {reason}")]
    InvalidSpeed { speed: f64, reason: &'static str },
    #[error("session already finished")]
    Finished,
    #[error(
        "outside driving window at {clock}: driving is permitted from {window}; next driving hour starts at {next}"
    )]
    OutsideDrivingWindow {
        clock: SimTime,
        next: SimTime,
        window: WindowLabel,
    },
    #[error("cannot advance to {until}: clock is already at {clock}")]
    TimeInPast { clock: SimTime, until: SimTime },
    #[error(transparent)]
    Weather(#[from] WeatherError),
}

fn join_fields(errs: &[FieldError]) -> String {
    let mut s = String::new();
    for (i, e) in errs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(e.field);
        s.push_str(": ");
        s.push_str(e.reason);
    }
    s
}

/// `HH:MM to HH:MM` rendering of a daily window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowLabel(pub DailyWindow);

impl fmt::Display for WindowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hm = |s: i64| (s / 3600, (s % 3600) / 60);
        let (a, b) = hm(self.0.start_s);
        let (c, d) = hm(self.0.end_s);
        write!(f, "{a:02}:{b:02} to {c:02}:{d:02}")
    }
}

/// When the constant system load is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemLossMode {
    /// Whenever the charging window is open (electronics on for charging).
    #[default]
    ChargingWindow,
    Always,
    DrivingWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub driving_window: DailyWindow,
    pub charging_window: DailyWindow,
    pub speed_min_kmh: u32,
    pub speed_max_kmh: u32,
    pub speed_increment_kmh: u32,
    pub start_time: SimTime,
    /// Initial battery energy; `None` starts full.
    pub soc_start_wh: Option<f64>,
    /// Panels keep charging while the vehicle drives.
    pub charge_while_driving: bool,
    pub system_loss: SystemLossMode,
    /// Upper bound on an integration piece, seconds.
    pub max_substep_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            driving_window: DailyWindow::new(8 * 3600, 17 * 3600),
            charging_window: DailyWindow::new(6 * 3600 + 1800, 19 * 3600),
            speed_min_kmh: 30,
            speed_max_kmh: 130,
            speed_increment_kmh: 1,
            start_time: SimTime(8 * 3600),
            soc_start_wh: None,
            charge_while_driving: true,
            system_loss: SystemLossMode::ChargingWindow,
            max_substep_s: 600.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let ok_window = |w: &DailyWindow| 0 <= w.start_s && w.start_s < w.end_s && w.end_s <= DAY_S;
        if !ok_window(&self.driving_window) || !ok_window(&self.charging_window) {
            return Err(EngineError::InvalidConfig("windows must satisfy 0 <= start < end <= 24:00"));
        }
        if !self.charging_window.contains_window(&self.driving_window) {
            return Err(EngineError::InvalidConfig("driving window must lie inside the charging window"));
        }
        if self.driving_window.end_s - self.driving_window.start_s < STEP_S {
            return Err(EngineError::InvalidConfig("driving window shorter than one step"));
        }
        if self.speed_increment_kmh == 0 {
            return Err(EngineError::InvalidConfig("speed increment must be > 0"));
        }
        if self.speed_min_kmh == 0 || self.speed_min_kmh >= self.speed_max_kmh {
            return Err(EngineError::InvalidConfig("need 0 < speed_min < speed_max"));
        }
        if !self.speed_min_kmh.is_multiple_of(self.speed_increment_kmh)
            || !self.speed_max_kmh.is_multiple_of(self.speed_increment_kmh)
        {
            return Err(EngineError::InvalidConfig("speed bounds must lie on the speed grid"));
        }
        if !(self.max_substep_s > 0.0) {
            return Err(EngineError::InvalidConfig("max_substep_s must be > 0"));
        }
        Ok(())
    }

    /// Speeds the engine accepts for a moving step, ascending.
    pub fn speed_grid(&self) -> impl Iterator<Item = u32> + '_ {
        (self.speed_min_kmh..=self.speed_max_kmh).step_by(self.speed_increment_kmh as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Meters from the route start.
    pub odometer: f64,
    /// Wh in [0, capacity].
    pub battery: f64,
    pub clock: SimTime,
    /// 1 on the start date, +1 at every midnight passed.
    pub day_index: u32,
    pub finished: bool,
    /// The last step ended in a depletion halt.
    pub halted_for_charge: bool,
    /// Interpolated arrival instant, seconds since the epoch.
    pub arrived_at_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepEvent {
    DepletedMidhour,
    Arrived,
    BatteryFullSpill,
    OutsideDrivingWindow,
}

/// Weather at the vehicle's position when a step began.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepWeather {
    pub zone: String,
    pub ghi: f64,
    pub temperature: f64,
    pub wind_direction: f64,
    pub wind_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    /// Step start.
    pub hour: SimTime,
    /// Step length, seconds (3600 for driving steps, up to 3600 for idle).
    pub duration_s: i64,
    pub day_index: u32,
    pub commanded_speed_kmh: u32,
    pub distance_m: f64,
    pub driven_hours: f64,
    pub breakdown: EnergyBreakdown,
    pub events: Vec<StepEvent>,
    pub battery_before_wh: f64,
    pub battery_wh: f64,
    pub odometer_m: f64,
    pub weather: Option<StepWeather>,
}

/// Per-day aggregate of a journey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayReport {
    pub day: u32,
    pub distance_m: f64,
    pub driven_hours: f64,
    pub breakdown: EnergyBreakdown,
    /// Irradiation at the vehicle's location over the day, kWh/m².
    pub ghi_kwh_m2: f64,
    pub max_temperature_c: f64,
    pub mean_wind_speed_ms: f64,
    /// Vector-mean direction the wind blew from, degrees.
    pub wind_direction_deg: f64,
    pub end_battery_wh: f64,
    pub depletion_events: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JourneyLog {
    pub days: Vec<DayReport>,
    pub finished: bool,
    pub arrival_day: Option<u32>,
    pub arrival_s: Option<f64>,
    pub total_distance_m: f64,
    pub totals: EnergyBreakdown,
    pub depletion_events: u32,
    pub spill_events: u32,
    pub min_battery_wh: f64,
    pub max_battery_wh: f64,
    /// The run stopped because the weather series ended.
    pub weather_exhausted: bool,
    pub final_state: VehicleState,
    pub steps: Vec<StepLog>,
}

/// Chooses the commanded speed for each driving hour.
pub trait Policy {
    fn speed_kmh(&mut self, engine: &Engine<'_>, state: &VehicleState) -> u32;
}

impl<F> Policy for F
where
    F: FnMut(&Engine<'_>, &VehicleState) -> u32,
{
    fn speed_kmh(&mut self, engine: &Engine<'_>, state: &VehicleState) -> u32 {
        self(engine, state)
    }
}

/// Drives at one speed every hour.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSpeed(pub u32);

impl Policy for ConstantSpeed {
    fn speed_kmh(&mut self, _: &Engine<'_>, _: &VehicleState) -> u32 {
        self.0
    }
}

/// The journey simulator bound to one vehicle, route, weather and config.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    spec: VehicleSpec,
    physics: PhysicsConstants,
    config: SimConfig,
    route: &'a Route,
    weather: &'a WeatherSeries,
    segment_zone: Vec<usize>,
}

/// Mutable integration state shared by driving and idle steps.
struct Integrator {
    odometer: f64,
    battery: f64,
    breakdown: EnergyBreakdown,
    moving_s: f64,
    distance: f64,
    depleted: bool,
    spilled: bool,
    arrived_at: Option<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(
        spec: VehicleSpec,
        physics: PhysicsConstants,
        route: &'a Route,
        weather: &'a WeatherSeries,
        config: SimConfig,
    ) -> Result<Self, EngineError> {
        spec.validate().map_err(EngineError::InvalidSpec)?;
        physics.validate().map_err(EngineError::InvalidPhysics)?;
        config.validate()?;
        let mut segment_zone = Vec::with_capacity(route.segments().len());
        for seg in route.segments() {
            let zone = &route.nodes()[seg.start_node_index].weather_zone_id;
            let zi = weather.zone_index(zone).ok_or_else(|| {
                EngineError::Setup(alloc::format!("route zone {zone:?} has no weather series"))
            })?;
            segment_zone.push(zi);
        }
        Ok(Engine {
            spec,
            physics,
            config,
            route,
            weather,
            segment_zone,
        })
    }

    pub fn spec(&self) -> &VehicleSpec {
        &self.spec
    }

    pub fn physics(&self) -> &PhysicsConstants {
        &self.physics
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn route(&self) -> &'a Route {
        self.route
    }

    pub fn weather(&self) -> &'a WeatherSeries {
        self.weather
    }

    /// Same bindings with a different config.
    pub fn with_config(&self, config: SimConfig) -> Result<Engine<'a>, EngineError> {
        config.validate()?;
        Ok(Engine {
            config,
            ..self.clone()
        })
    }

    pub fn new_session(&self) -> Result<VehicleState, EngineError> {
        let start = self.config.start_time;
        if !self.weather.covers(start) {
            return Err(EngineError::Setup(alloc::format!(
                "weather series [{}, {}] does not cover start time {}",
                self.weather.first_time(),
                self.weather.last_time(),
                start
            )));
        }
        let capacity = self.spec.battery_capacity;
        let battery = self.config.soc_start_wh.unwrap_or(capacity);
        if !(0.0..=capacity).contains(&battery) {
            return Err(EngineError::Setup(alloc::format!(
                "initial battery {battery} Wh outside [0, {capacity}] Wh"
            )));
        }
        Ok(VehicleState {
            odometer: 0.0,
            battery,
            clock: start,
            day_index: 1,
            finished: false,
            halted_for_charge: false,
            arrived_at_s: None,
        })
    }

    fn day_index_at(&self, t: SimTime) -> u32 {
        (t.day_number() - self.config.start_time.day_number() + 1).max(1) as u32
    }

    /// Whether a full driving step may start at `clock`.
    pub fn can_drive_at(&self, clock: SimTime) -> bool {
        let w = &self.config.driving_window;
        clock >= w.start_on(clock) && clock + STEP_S <= w.end_on(clock)
    }

    /// Earliest instant at or after `clock` where a driving step may start.
    pub fn next_driving_start(&self, clock: SimTime) -> SimTime {
        let w = &self.config.driving_window;
        if self.can_drive_at(clock) {
            clock
        } else if clock < w.start_on(clock) {
            w.start_on(clock)
        } else {
            w.start_on(clock.midnight() + DAY_S)
        }
    }

    fn check_speed(&self, speed_kmh: f64) -> Result<u32, EngineError> {
        let bad = |reason| EngineError::InvalidSpeed {
            speed: speed_kmh,
            reason,
        };
        if !speed_kmh.is_finite() || speed_kmh < 0.0 {
            return Err(bad("must be a finite, non-negative number"));
        }
        if speed_kmh == 0.0 {
            return Ok(0);
        }
        let c = &self.config;
        if speed_kmh < c.speed_min_kmh as f64 || speed_kmh > c.speed_max_kmh as f64 {
            return Err(bad("outside the permitted speed range"));
        }
        let whole = speed_kmh as u32;
        if whole as f64 != speed_kmh || !whole.is_multiple_of(c.speed_increment_kmh) {
            return Err(bad("not on the speed grid"));
        }
        Ok(whole)
    }

    /// Electrical power needed to hold `speed` (m/s) on segment `seg` in the
    /// given weather, W (traction only, no system load).
    pub fn traction_power_on(&self, seg: usize, speed: f64, temperature: f64, wind_from: f64, wind_speed: f64) -> f64 {
        let s = &self.route.segments()[seg];
        let phys = self.physics.at_temperature(temperature);
        let hw = headwind_component(wind_speed, wind_from, s.heading);
        let rise = s.elevation_change / s.length;
        let grade_force = effective_gravitational_energy(&self.spec, &phys, rise) * J_PER_WH;
        speed * (drag_force(&self.spec, &phys, speed, hw) + rolling_force(&self.spec, &phys, s.incline) + grade_force)
    }

    fn system_applies(&self, t: SimTime) -> bool {
        let sod = t.second_of_day();
        let inside = |w: &DailyWindow| w.start_s <= sod && sod < w.end_s;
        match self.config.system_loss {
            SystemLossMode::Always => true,
            SystemLossMode::ChargingWindow => inside(&self.config.charging_window),
            SystemLossMode::DrivingWindow => inside(&self.config.driving_window),
        }
    }

    fn in_charging_window(&self, t: SimTime) -> bool {
        let sod = t.second_of_day();
        let w = &self.config.charging_window;
        w.start_s <= sod && sod < w.end_s
    }

    /// Next instant after `t` (seconds, fractional) where a window opens or
    /// closes or the hour changes.
    fn next_boundary(&self, t: f64) -> f64 {
        let base = libm::floor(t / DAY_S as f64) * DAY_S as f64;
        let hour = (libm::floor(t / HOUR_S) + 1.0) * HOUR_S;
        let mut next = hour;
        let c = &self.config;
        for b in [
            c.charging_window.start_s,
            c.charging_window.end_s,
            c.driving_window.start_s,
            c.driving_window.end_s,
        ] {
            for day in [base, base + DAY_S as f64] {
                let x = day + b as f64;
                if x > t && x < next {
                    next = x;
                }
            }
        }
        next
    }

    fn step_weather(&self, odometer: f64, t: SimTime) -> Option<StepWeather> {
        let seg = self.route.segment_index_at(odometer);
        let s = self.weather.sample_by_index(self.segment_zone[seg], t).ok()?;
        Some(StepWeather {
            zone: s.zone_id.clone(),
            ghi: s.ghi,
            temperature: s.temperature,
            wind_direction: s.wind_direction,
            wind_speed: s.wind_speed,
        })
    }

    /// Integrates `[from, to)` at `speed_kmh` (0 = stationary).
    fn integrate(&self, state: &VehicleState, from: SimTime, to: SimTime, speed_kmh: u32) -> Result<Integrator, EngineError> {
        let v = kmh_to_ms(speed_kmh as f64);
        let total = self.route.total_length();
        let capacity = self.spec.battery_capacity;
        let mut it = Integrator {
            odometer: state.odometer,
            battery: state.battery,
            breakdown: EnergyBreakdown::default(),
            moving_s: 0.0,
            distance: 0.0,
            depleted: false,
            spilled: false,
            arrived_at: None,
        };
        let mut moving = v > 0.0 && !state.finished;
        let end = to.seconds() as f64;
        let mut t = from.seconds() as f64;
        while t < end - 1e-9 {
            if moving && it.odometer >= total {
                moving = false;
            }
            let seg = self.route.segment_index_at(it.odometer);
            let clock = SimTime(libm::floor(t) as i64);
            let charging = self.in_charging_window(clock) && (!moving || self.config.charge_while_driving);
            let sys_on = self.system_applies(clock);
            let need_weather = charging || moving;
            let sample = if need_weather {
                Some(self.weather.sample_by_index(self.segment_zone[seg], clock)?)
            } else {
                None
            };

            let mut dt = (end - t).min(self.next_boundary(t) - t).min(self.config.max_substep_s);
            let mut reaches_segment_end = false;
            let p_charge = match (charging, sample) {
                (true, Some(s)) => charge_power(&self.spec, s.ghi, s.temperature),
                _ => 0.0,
            };
            let p_sys = if sys_on { self.spec.constant_power_loss } else { 0.0 };

            let (f_drag, f_roll, f_grav) = if moving {
                let s = sample.expect("weather loaded for moving piece");
                let rs = &self.route.segments()[seg];
                let phys = self.physics.at_temperature(s.temperature);
                let hw = headwind_component(s.wind_speed, s.wind_direction, rs.heading);
                let rise = rs.elevation_change / rs.length;
                let seg_left = self.route.segment_end(seg) - it.odometer;
                if seg_left / v <= dt {
                    dt = seg_left / v;
                    reaches_segment_end = true;
                }
                (
                    drag_force(&self.spec, &phys, v, hw),
                    rolling_force(&self.spec, &phys, rs.incline),
                    effective_gravitational_energy(&self.spec, &phys, rise) * J_PER_WH,
                )
            } else {
                (0.0, 0.0, 0.0)
            };
            let vel = if moving { v } else { 0.0 };
            let p_trac = vel * (f_drag + f_roll + f_grav);
            let net = p_charge - p_sys - p_trac;

            let mut piece;
            if net < 0.0 && it.battery + net * dt / HOUR_S < 0.0 {
                if moving {
                    // Battery empties inside the piece: drive until t*, then stop.
                    let t_star = (it.battery * HOUR_S / -net).min(dt);
                    let d = v * t_star;
                    piece = EnergyBreakdown::consumption(
                        f_drag * d / J_PER_WH,
                        f_roll * d / J_PER_WH,
                        f_grav * d / J_PER_WH,
                        p_sys * t_star / HOUR_S,
                    );
                    piece.charge = p_charge * t_star / HOUR_S;
                    it.odometer = (it.odometer + d).min(self.route.segment_end(seg));
                    it.distance += d;
                    it.moving_s += t_star;
                    it.battery = 0.0;
                    it.breakdown += piece;
                    it.depleted = true;
                    moving = false;
                    t += t_star;
                    continue;
                }
                // Stationary with an empty battery: the load only gets what
                // the panels deliver.
                let charge = p_charge * dt / HOUR_S;
                piece = EnergyBreakdown::consumption(0.0, 0.0, 0.0, it.battery + charge);
                piece.charge = charge;
                it.battery = 0.0;
            } else {
                let d = vel * dt;
                piece = EnergyBreakdown::consumption(
                    f_drag * d / J_PER_WH,
                    f_roll * d / J_PER_WH,
                    f_grav * d / J_PER_WH,
                    p_sys * dt / HOUR_S,
                );
                piece.charge = p_charge * dt / HOUR_S;
                let mut b = it.battery + net * dt / HOUR_S;
                if b > capacity {
                    piece.spilled = b - capacity;
                    b = capacity;
                    it.spilled = true;
                }
                it.battery = b.max(0.0);
                if moving {
                    it.odometer = if reaches_segment_end {
                        self.route.segment_end(seg)
                    } else {
                        (it.odometer + d).min(self.route.segment_end(seg))
                    };
                    it.distance += d;
                    it.moving_s += dt;
                }
            }
            it.breakdown += piece;
            t += dt;
            if moving && it.odometer >= total {
                it.odometer = total;
                it.arrived_at = Some(t);
                break;
            }
        }
        Ok(it)
    }

    /// One driving hour at `speed_kmh` (0 = deliberate stop).
    pub fn step_hour(&self, state: &VehicleState, speed_kmh: f64) -> Result<(VehicleState, StepLog), EngineError> {
        if state.finished {
            return Err(EngineError::Finished);
        }
        let speed = self.check_speed(speed_kmh)?;
        if !self.can_drive_at(state.clock) {
            return Err(EngineError::OutsideDrivingWindow {
                clock: state.clock,
                next: self.next_driving_start(state.clock),
                window: WindowLabel(self.config.driving_window),
            });
        }
        let from = state.clock;
        let to = from + STEP_S;
        let weather = self.step_weather(state.odometer, from);
        let it = self.integrate(state, from, to, speed)?;

        let mut events = Vec::new();
        if it.depleted {
            events.push(StepEvent::DepletedMidhour);
        }
        if it.arrived_at.is_some() {
            events.push(StepEvent::Arrived);
        }
        if it.spilled {
            events.push(StepEvent::BatteryFullSpill);
        }
        let next = VehicleState {
            odometer: it.odometer,
            battery: it.battery,
            clock: to,
            day_index: self.day_index_at(to),
            finished: it.arrived_at.is_some(),
            halted_for_charge: it.depleted,
            arrived_at_s: it.arrived_at,
        };
        let log = StepLog {
            hour: from,
            duration_s: STEP_S,
            day_index: self.day_index_at(from),
            commanded_speed_kmh: speed,
            distance_m: it.distance,
            driven_hours: it.moving_s / HOUR_S,
            breakdown: it.breakdown,
            events,
            battery_before_wh: state.battery,
            battery_wh: it.battery,
            odometer_m: it.odometer,
            weather,
        };
        Ok((next, log))
    }

    /// Stationary steps up to `until`, each ending at the next whole hour.
    pub fn advance_idle(&self, state: &VehicleState, until: SimTime) -> Result<(VehicleState, Vec<StepLog>), EngineError> {
        if state.finished {
            return Err(EngineError::Finished);
        }
        if until <= state.clock {
            return Err(EngineError::TimeInPast {
                clock: state.clock,
                until,
            });
        }
        let mut s = state.clone();
        let mut logs = Vec::new();
        while s.clock < until {
            let from = s.clock;
            let to = from.next_hour_boundary().min(until);
            let weather = self.step_weather(s.odometer, from);
            let it = self.integrate(&s, from, to, 0)?;
            let mut events = Vec::new();
            if it.spilled {
                events.push(StepEvent::BatteryFullSpill);
            }
            let dw = &self.config.driving_window;
            if !(from >= dw.start_on(from) && to <= dw.end_on(from)) {
                events.push(StepEvent::OutsideDrivingWindow);
            }
            logs.push(StepLog {
                hour: from,
                duration_s: to - from,
                day_index: self.day_index_at(from),
                commanded_speed_kmh: 0,
                distance_m: 0.0,
                driven_hours: 0.0,
                breakdown: it.breakdown,
                events,
                battery_before_wh: s.battery,
                battery_wh: it.battery,
                odometer_m: s.odometer,
                weather,
            });
            s.battery = it.battery;
            s.clock = to;
            s.day_index = self.day_index_at(to);
            s.halted_for_charge = false;
        }
        Ok((s, logs))
    }

    /// Drives the next driving day under `policy`: idles up to the window
    /// start, steps each hour until the window closes or the route ends, then
    /// idles to the end of the charging window. A state already inside the
    /// driving window continues the current day.
    pub fn run_day(&self, state: &VehicleState, policy: &mut dyn Policy) -> Result<(VehicleState, Vec<StepLog>), EngineError> {
        if state.finished {
            return Ok((state.clone(), Vec::new()));
        }
        let dw = self.config.driving_window;
        let start = self.next_driving_start(state.clock);
        let day = start.midnight();
        let mut s = state.clone();
        let mut logs = Vec::new();
        if s.clock < start {
            let (n, l) = self.advance_idle(&s, start)?;
            s = n;
            logs.extend(l);
        }
        while !s.finished && s.clock + STEP_S <= dw.end_on(day) {
            let v = policy.speed_kmh(self, &s);
            let (n, log) = self.step_hour(&s, v as f64)?;
            s = n;
            logs.push(log);
        }
        let close = self.config.charging_window.end_on(day);
        if !s.finished && s.clock < close {
            let (n, l) = self.advance_idle(&s, close)?;
            s = n;
            logs.extend(l);
        }
        Ok((s, logs))
    }

    /// Runs `policy` day by day until arrival, `max_days` driving days, or the
    /// end of the weather series.
    pub fn run_to_finish(&self, state: &VehicleState, policy: &mut dyn Policy, max_days: u32) -> Result<JourneyLog, EngineError> {
        let mut s = state.clone();
        let mut steps = Vec::new();
        let mut weather_exhausted = false;
        for _ in 0..max_days.max(1) {
            if s.finished {
                break;
            }
            match self.run_day(&s, policy) {
                Ok((n, l)) => {
                    s = n;
                    steps.extend(l);
                }
                Err(EngineError::Weather(WeatherError::OutOfSpan { .. })) => {
                    weather_exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(self.journey_log(state, s, steps, weather_exhausted))
    }

    /// Aggregates step logs into a journey log.
    pub fn journey_log(&self, initial: &VehicleState, final_state: VehicleState, steps: Vec<StepLog>, weather_exhausted: bool) -> JourneyLog {
        let mut totals = EnergyBreakdown::default();
        let mut days: Vec<DayReport> = Vec::new();
        let mut depletion_events = 0;
        let mut spill_events = 0;
        let mut min_b = initial.battery;
        let mut max_b = initial.battery;
        for st in &steps {
            totals += st.breakdown;
            min_b = min_b.min(st.battery_wh);
            max_b = max_b.max(st.battery_wh);
            let dep = st.events.contains(&StepEvent::DepletedMidhour);
            depletion_events += dep as u32;
            spill_events += st.events.contains(&StepEvent::BatteryFullSpill) as u32;
            if days.last().map(|d| d.day) != Some(st.day_index) {
                days.push(DayReport {
                    day: st.day_index,
                    distance_m: 0.0,
                    driven_hours: 0.0,
                    breakdown: EnergyBreakdown::default(),
                    ghi_kwh_m2: 0.0,
                    max_temperature_c: f64::NEG_INFINITY,
                    mean_wind_speed_ms: 0.0,
                    wind_direction_deg: 0.0,
                    end_battery_wh: 0.0,
                    depletion_events: 0,
                });
            }
            let d = days.last_mut().unwrap();
            d.distance_m += st.distance_m;
            d.driven_hours += st.driven_hours;
            d.breakdown += st.breakdown;
            d.end_battery_wh = st.battery_wh;
            d.depletion_events += dep as u32;
        }
        for d in &mut days {
            self.fill_day_weather(d, &steps);
        }
        JourneyLog {
            days,
            finished: final_state.finished,
            arrival_day: final_state
                .arrived_at_s
                .map(|t| self.day_index_at(SimTime(libm::floor(t) as i64))),
            arrival_s: final_state.arrived_at_s,
            total_distance_m: final_state.odometer - initial.odometer,
            totals,
            depletion_events,
            spill_events,
            min_battery_wh: min_b,
            max_battery_wh: max_b,
            weather_exhausted,
            final_state,
            steps,
        }
    }

    /// Weather seen at the vehicle's location through the day: for each hour,
    /// the zone the vehicle occupied when that hour began.
    fn fill_day_weather(&self, day: &mut DayReport, steps: &[StepLog]) {
        let in_day: Vec<&StepLog> = steps.iter().filter(|s| s.day_index == day.day).collect();
        let Some(first) = in_day.first() else { return };
        let midnight = first.hour.midnight();
        let mut ghi_wh = 0.0;
        let mut tmax = f64::NEG_INFINITY;
        for h in 0..24 {
            let t = midnight + h * 3600;
            let odo = in_day
                .iter()
                .rev()
                .find(|s| s.hour <= t)
                .map(|s| s.odometer_m)
                .unwrap_or(in_day[0].odometer_m - in_day[0].distance_m);
            let odo = odo.clamp(0.0, self.route.total_length());
            let seg = self.route.segment_index_at(odo);
            if let Ok(s) = self.weather.sample_by_index(self.segment_zone[seg], t) {
                ghi_wh += s.ghi;
                tmax = tmax.max(s.temperature);
            }
        }
        day.ghi_kwh_m2 = ghi_wh / 1000.0;
        day.max_temperature_c = if tmax.is_finite() { tmax } else { 0.0 };

        let driving: Vec<&StepWeather> = in_day
            .iter()
            .filter(|s| s.driven_hours > 0.0)
            .filter_map(|s| s.weather.as_ref())
            .collect();
        let pool: Vec<&StepWeather> = if driving.is_empty() {
            in_day.iter().filter_map(|s| s.weather.as_ref()).collect()
        } else {
            driving
        };
        if !pool.is_empty() {
            let n = pool.len() as f64;
            day.mean_wind_speed_ms = pool.iter().map(|w| w.wind_speed).sum::<f64>() / n;
            let (sx, sy) = pool.iter().fold((0.0, 0.0), |(x, y), w| {
                let a = w.wind_direction.to_radians();
                (x + w.wind_speed * libm::sin(a), y + w.wind_speed * libm::cos(a))
            });
            day.wind_direction_deg = crate::geo::normalize_deg(libm::atan2(sx, sy).to_degrees());
        }
    }
}
