//! The five speed strategies as hour-level policies.

use alloc::boxed::Box;

use serde::{Deserialize, Serialize};

use crate::energy::charge_power;
use crate::engine::{ConstantSpeed, Engine, EngineError, JourneyLog, Policy, VehicleState};
use crate::kmh_to_ms;
use crate::planner::SpeedPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Min,
    Max,
    Avg,
    DailyAvg,
    Soc,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Min,
        StrategyKind::Max,
        StrategyKind::Avg,
        StrategyKind::DailyAvg,
        StrategyKind::Soc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Min => "min",
            StrategyKind::Max => "max",
            StrategyKind::Avg => "avg",
            StrategyKind::DailyAvg => "daily-avg",
            StrategyKind::Soc => "soc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Min => "1 Minimum speed",
            StrategyKind::Max => "2 Maximum speed",
            StrategyKind::Avg => "3 Average speed",
            StrategyKind::DailyAvg => "4 Daily average speed",
            StrategyKind::Soc => "5 SoC maintenance",
        }
    }
}

/// Proportional SoC controller around the speed that balances charge and
/// consumption power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SocMaintain {
    pub band_lo: f64,
    pub band_hi: f64,
    pub speed_lo_kmh: u32,
    pub speed_hi_kmh: u32,
    pub gain: f64,
}

impl Default for SocMaintain {
    fn default() -> Self {
        SocMaintain {
            band_lo: 0.3,
            band_hi: 0.8,
            speed_lo_kmh: 30,
            speed_hi_kmh: 85,
            gain: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("invalid strategy config: {0}")]
    InvalidConfig(&'static str),
    #[error("no constant speed arrives without emptying the battery")]
    NoFeasibleConstantSpeed { min_speed_outcome: Box<JourneyLog> },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl SocMaintain {
    pub fn validate(&self, engine: &Engine<'_>) -> Result<(), StrategyError> {
        if !(0.0 <= self.band_lo && self.band_lo < self.band_hi && self.band_hi <= 1.0) {
            return Err(StrategyError::InvalidConfig("SoC band needs 0 <= lo < hi <= 1"));
        }
        let c = engine.config();
        if self.speed_lo_kmh >= self.speed_hi_kmh
            || self.speed_lo_kmh < c.speed_min_kmh
            || self.speed_hi_kmh > c.speed_max_kmh
        {
            return Err(StrategyError::InvalidConfig(
                "SoC speed clamp must be a non-empty range inside the engine speed limits",
            ));
        }
        Ok(())
    }

    fn band_mid(&self) -> f64 {
        (self.band_lo + self.band_hi) / 2.0
    }

    /// Commanded speed before grid rounding, km/h.
    pub fn raw_speed_kmh(&self, balance_kmh: f64, soc_fraction: f64) -> f64 {
        let span = (self.speed_hi_kmh - self.speed_lo_kmh) as f64;
        let v = balance_kmh + self.gain * (soc_fraction - self.band_mid()) * span;
        v.clamp(self.speed_lo_kmh as f64, self.speed_hi_kmh as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    MinSpeed(u32),
    MaxSpeed(u32),
    AverageSpeed(u32),
    DailyAverage(SpeedPlan),
    SocMaintain(SocMaintain),
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::MinSpeed(_) => StrategyKind::Min,
            Strategy::MaxSpeed(_) => StrategyKind::Max,
            Strategy::AverageSpeed(_) => StrategyKind::Avg,
            Strategy::DailyAverage(_) => StrategyKind::DailyAvg,
            Strategy::SocMaintain(_) => StrategyKind::Soc,
        }
    }
}

/// Speed that makes traction plus system power equal charge power at the
/// vehicle's current position and hour, km/h, within `[0, speed_max]`.
pub fn balance_speed_kmh(engine: &Engine<'_>, state: &VehicleState) -> Option<f64> {
    let route = engine.route();
    let seg = route.segment_index_at(state.odometer);
    let zone = route.zone_at(state.odometer);
    let w = engine.weather().sample(zone, state.clock).ok()?;
    let cfg = engine.config();
    let p_charge = if cfg.charge_while_driving {
        charge_power(engine.spec(), w.ghi, w.temperature)
    } else {
        0.0
    };
    let p_sys = engine.spec().constant_power_loss;
    let surplus = |kmh: f64| {
        p_charge - p_sys - engine.traction_power_on(seg, kmh_to_ms(kmh), w.temperature, w.wind_direction, w.wind_speed)
    };
    let hi = cfg.speed_max_kmh as f64;
    Some(bisect_root(surplus, 0.0, hi))
}

/// Root of a function positive at `lo` and negative at `hi`; clamps to the
/// ends when the sign does not change.
pub fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if f(lo) <= 0.0 {
        return lo;
    }
    if f(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-10 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Nearest engine-grid speed, clamped to `[lo, hi]`.
fn snap(engine: &Engine<'_>, kmh: f64, lo: u32, hi: u32) -> u32 {
    let inc = engine.config().speed_increment_kmh as f64;
    let v = libm::round(kmh / inc) * inc;
    (v as u32).clamp(lo, hi)
}

/// The speed a strategy commands for the current hour.
pub fn policy_speed(strategy: &Strategy, engine: &Engine<'_>, state: &VehicleState) -> u32 {
    match strategy {
        Strategy::MinSpeed(v) | Strategy::MaxSpeed(v) | Strategy::AverageSpeed(v) => *v,
        Strategy::DailyAverage(plan) => plan
            .speed_for_day(state.day_index)
            .unwrap_or(engine.config().speed_min_kmh),
        Strategy::SocMaintain(c) => {
            let soc = state.battery / engine.spec().battery_capacity;
            let balance = balance_speed_kmh(engine, state).unwrap_or(c.speed_lo_kmh as f64);
            snap(engine, c.raw_speed_kmh(balance, soc), c.speed_lo_kmh, c.speed_hi_kmh)
        }
    }
}

impl Policy for Strategy {
    fn speed_kmh(&mut self, engine: &Engine<'_>, state: &VehicleState) -> u32 {
        policy_speed(self, engine, state)
    }
}

/// Whether a constant speed reaches the finish within `max_days` without
/// ever emptying the battery.
pub fn constant_speed_outcome(engine: &Engine<'_>, state: &VehicleState, speed: u32, max_days: u32) -> Result<(bool, JourneyLog), EngineError> {
    let log = engine.run_to_finish(state, &mut ConstantSpeed(speed), max_days)?;
    Ok((log.finished && log.depletion_events == 0, log))
}

/// Largest engine-grid constant speed that arrives without depletion.
///
/// Binary search with the engine as oracle on "never empties the battery",
/// which only gets harder as speed rises; the winner must also arrive.
pub fn compute_average_speed(engine: &Engine<'_>, state: &VehicleState, max_days: u32) -> Result<u32, StrategyError> {
    let grid: alloc::vec::Vec<u32> = engine.config().speed_grid().collect();
    let run = |v: u32| engine.run_to_finish(state, &mut ConstantSpeed(v), max_days);
    let min_log = run(grid[0])?;
    if min_log.depletion_events > 0 {
        return Err(StrategyError::NoFeasibleConstantSpeed {
            min_speed_outcome: Box::new(min_log),
        });
    }
    let last = grid.len() - 1;
    let (best, best_log) = {
        let top = run(grid[last])?;
        if top.depletion_events == 0 {
            (grid[last], top)
        } else {
            // Invariant: grid[lo] never depletes, grid[hi] does.
            let (mut lo, mut hi, mut lo_log) = (0usize, last, min_log.clone());
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                let log = run(grid[mid])?;
                if log.depletion_events == 0 {
                    lo = mid;
                    lo_log = log;
                } else {
                    hi = mid;
                }
            }
            (grid[lo], lo_log)
        }
    };
    if best_log.finished {
        Ok(best)
    } else {
        Err(StrategyError::NoFeasibleConstantSpeed {
            min_speed_outcome: Box::new(min_log),
        })
    }
}
