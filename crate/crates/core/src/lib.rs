//! Solar vehicle journey simulation core.
//!
//! Everything in this crate is pure computation over in-memory data: route
//! geometry, the hourly weather grid, the energy model, the hour-stepping
//! engine, the daily speed planner and the speed strategies. File formats,
//! persistence and transports live in the `solarsim` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod energy;
pub mod engine;
pub mod geo;
pub mod planner;
pub mod strategies;
pub mod time;
pub mod weather;

pub use energy::{EnergyBreakdown, PhysicsConstants, VehicleSpec};
pub use engine::{Engine, JourneyLog, SimConfig, StepEvent, StepLog, VehicleState};
pub use geo::{Route, RouteNode, RouteSegment};
pub use planner::{PlannerConfig, SpeedPlan};
pub use strategies::Strategy;
pub use time::SimTime;
pub use weather::{WeatherSample, WeatherSeries};

/// Seconds per hour.
pub const HOUR_S: f64 = 3600.0;
/// Joules per watt-hour.
pub const J_PER_WH: f64 = 3600.0;

/// km/h to m/s.
#[inline]
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}
