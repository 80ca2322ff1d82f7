//! A resolved simulation setup (vehicle, route, weather, settings) and the
//! strategy runs built on it. Shared by the CLI and the service.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use solarsim_core::engine::{EngineError, SystemLossMode};
use solarsim_core::planner::{evaluate_plan, plan_daily_speeds, PlannerError};
use solarsim_core::strategies::{compute_average_speed, SocMaintain, StrategyError, StrategyKind};
use solarsim_core::time::DailyWindow;
use solarsim_core::{
    Engine, JourneyLog, PhysicsConstants, PlannerConfig, Route, SimConfig, SpeedPlan, Strategy, VehicleSpec,
    VehicleState, WeatherSeries,
};

use crate::formats::{self, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockWindow {
    pub start: String,
    pub end: String,
}

impl ClockWindow {
    fn new(start: &str, end: &str) -> Self {
        ClockWindow {
            start: start.into(),
            end: end.into(),
        }
    }

    fn resolve(&self) -> Result<DailyWindow, String> {
        Ok(DailyWindow::new(
            formats::parse_clock(&self.start)?,
            formats::parse_clock(&self.end)?,
        ))
    }
}

impl Default for ClockWindow {
    fn default() -> Self {
        ClockWindow::new("08:00", "17:00")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// Defaults to the driving-window opening on the first weather day.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_time: Option<String>,
    pub driving_window: ClockWindow,
    pub charging_window: ClockWindow,
    pub speed_min_kmh: u32,
    pub speed_max_kmh: u32,
    pub speed_increment_kmh: u32,
    /// Defaults to a full battery.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soc_start_wh: Option<f64>,
    pub charge_while_driving: bool,
    pub system_loss: SystemLossMode,
    pub max_substep_s: f64,
    /// Day cap for whole-journey runs.
    pub max_days: u32,
}

impl Default for SimSettings {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSettings {
            start_time: None,
            driving_window: ClockWindow::default(),
            charging_window: ClockWindow::new("06:30", "19:00"),
            speed_min_kmh: d.speed_min_kmh,
            speed_max_kmh: d.speed_max_kmh,
            speed_increment_kmh: d.speed_increment_kmh,
            soc_start_wh: None,
            charge_while_driving: d.charge_while_driving,
            system_loss: d.system_loss,
            max_substep_s: d.max_substep_s,
            max_days: 10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySettings {
    /// Constant speed of the minimum-speed strategy; defaults to the
    /// engine's lowest speed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_speed_kmh: Option<u32>,
    /// Constant speed of the maximum-speed strategy; defaults to the
    /// engine's highest speed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_speed_kmh: Option<u32>,
    pub soc: SocMaintain,
}

/// Everything besides vehicle, route and weather. Read from the optional
/// scenario TOML file or a session payload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimSettings,
    pub physics: PhysicsConstants,
    pub planner: PlannerConfig,
    pub strategies: StrategySettings,
}

impl RunConfig {
    pub fn parse_toml(text: &str, source_name: &str) -> Result<Self, FormatError> {
        toml::from_str(text).map_err(|e| FormatError::Syntax {
            source_name: source_name.into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::parse_toml(&formats::read_text(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Engine config for this weather series.
    pub fn sim_config(&self, weather: &WeatherSeries) -> Result<SimConfig, ScenarioError> {
        let s = &self.sim;
        let driving_window = s.driving_window.resolve().map_err(ScenarioError::Config)?;
        let charging_window = s.charging_window.resolve().map_err(ScenarioError::Config)?;
        let start_time = match &s.start_time {
            Some(t) => formats::parse_time(t).map_err(ScenarioError::Config)?,
            None => driving_window.start_on(weather.first_time().midnight()),
        };
        if s.max_days == 0 {
            return Err(ScenarioError::Config("max_days must be > 0".into()));
        }
        let cfg = SimConfig {
            driving_window,
            charging_window,
            speed_min_kmh: s.speed_min_kmh,
            speed_max_kmh: s.speed_max_kmh,
            speed_increment_kmh: s.speed_increment_kmh,
            start_time,
            soc_start_wh: s.soc_start_wh,
            charge_while_driving: s.charge_while_driving,
            system_loss: s.system_loss,
            max_substep_s: s.max_substep_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl ScenarioError {
    /// Energy or horizon infeasibility rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            ScenarioError::Planner(PlannerError::InfeasibleHorizon { .. })
                | ScenarioError::Strategy(StrategyError::NoFeasibleConstantSpeed { .. })
        )
    }
}

/// One strategy driven over the whole journey.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub log: JourneyLog,
}

impl StrategyRun {
    pub fn kind(&self) -> StrategyKind {
        self.strategy.kind()
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: VehicleSpec,
    pub config: RunConfig,
    pub route: Arc<Route>,
    pub weather: Arc<WeatherSeries>,
    sim: SimConfig,
}

impl Scenario {
    pub fn new(
        spec: VehicleSpec,
        config: RunConfig,
        route: Arc<Route>,
        weather: Arc<WeatherSeries>,
    ) -> Result<Self, ScenarioError> {
        let sim = config.sim_config(&weather)?;
        {
            let engine = Engine::new(spec.clone(), config.physics, &route, &weather, sim.clone())?;
            config.strategies.soc.validate(&engine)?;
        }
        let grid_ok = |v: Option<u32>| {
            v.is_none_or(|v| {
                v >= sim.speed_min_kmh && v <= sim.speed_max_kmh && (v - sim.speed_min_kmh) % sim.speed_increment_kmh == 0
            })
        };
        if !grid_ok(config.strategies.min_speed_kmh) || !grid_ok(config.strategies.max_speed_kmh) {
            return Err(ScenarioError::Config(
                "strategy speeds must lie on the engine speed grid".into(),
            ));
        }
        Ok(Scenario {
            spec,
            config,
            route,
            weather,
            sim,
        })
    }

    /// Loads the three input files plus an optional scenario file.
    pub fn load(route: &Path, weather: &Path, vehicle: &Path, config: Option<&Path>) -> Result<Self, ScenarioError> {
        let route = formats::load_route(route)?;
        let weather = formats::load_weather(weather)?;
        let spec = formats::load_vehicle(vehicle)?;
        let config = match config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Scenario::new(spec, config, Arc::new(route), Arc::new(weather))
    }

    pub fn sim_config(&self) -> &SimConfig {
        &self.sim
    }

    pub fn max_days(&self) -> u32 {
        self.config.sim.max_days
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(
            self.spec.clone(),
            self.config.physics,
            &self.route,
            &self.weather,
            self.sim.clone(),
        )
        .expect("validated in Scenario::new")
    }

    pub fn initial_state(&self) -> Result<VehicleState, ScenarioError> {
        Ok(self.engine().new_session()?)
    }

    /// Days left until the cap, counted from `state`'s day.
    pub fn remaining_days(&self, state: &VehicleState) -> u32 {
        self.max_days().saturating_sub(state.day_index.saturating_sub(1)).max(1)
    }

    pub fn plan(&self, state: &VehicleState, cfg: &PlannerConfig) -> Result<SpeedPlan, ScenarioError> {
        Ok(plan_daily_speeds(&self.engine(), state, cfg)?)
    }

    /// Predictions for externally supplied daily speeds starting at `state`.
    pub fn evaluate(&self, state: &VehicleState, speeds: &[u32]) -> Result<SpeedPlan, ScenarioError> {
        Ok(evaluate_plan(&self.engine(), state, speeds, self.remaining_days(state))?)
    }

    /// The strategy instance for `kind`, computing any derived parameters.
    pub fn strategy(&self, kind: StrategyKind, state: &VehicleState) -> Result<Strategy, ScenarioError> {
        let st = &self.config.strategies;
        Ok(match kind {
            StrategyKind::Min => Strategy::MinSpeed(st.min_speed_kmh.unwrap_or(self.sim.speed_min_kmh)),
            StrategyKind::Max => Strategy::MaxSpeed(st.max_speed_kmh.unwrap_or(self.sim.speed_max_kmh)),
            StrategyKind::Avg => {
                let engine = self.engine();
                Strategy::AverageSpeed(compute_average_speed(&engine, state, self.remaining_days(state))?)
            }
            StrategyKind::DailyAvg => Strategy::DailyAverage(self.plan(state, &self.config.planner)?),
            StrategyKind::Soc => Strategy::SocMaintain(st.soc),
        })
    }

    pub fn run_strategy(&self, mut strategy: Strategy, state: &VehicleState) -> Result<StrategyRun, ScenarioError> {
        let log = self
            .engine()
            .run_to_finish(state, &mut strategy, self.remaining_days(state))?;
        Ok(StrategyRun { strategy, log })
    }

    pub fn run_from(&self, kind: StrategyKind, state: &VehicleState) -> Result<StrategyRun, ScenarioError> {
        let strategy = self.strategy(kind, state)?;
        self.run_strategy(strategy, state)
    }

    /// Whole journey from the configured start.
    pub fn run(&self, kind: StrategyKind) -> Result<StrategyRun, ScenarioError> {
        self.run_from(kind, &self.initial_state()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use solarsim_core::{RouteNode, SimTime, WeatherSample};

    pub(crate) fn flat_scenario(ghi: f64) -> Scenario {
        let nodes = vec![
            RouteNode::new(0.0, 0.0, 0.0, "A", "z"),
            RouteNode::new(-1.0, 0.0, 0.0, "B", "z"),
        ];
        let mut samples = Vec::new();
        for h in 0..24 * 4 {
            let hod = h % 24;
            let g = if (7..18).contains(&hod) { ghi } else { 0.0 };
            samples.push(WeatherSample {
                zone_id: "z".into(),
                timestamp: SimTime::from_hours(h),
                ghi: g,
                temperature: 25.0,
                wind_direction: 0.0,
                wind_speed: 0.0,
            });
        }
        let spec = VehicleSpec {
            panel_area: 4.0,
            panel_efficiency: 0.25,
            system_efficiency: 0.9,
            mass: 300.0,
            drag_coefficient: 0.12,
            frontal_area: 1.0,
            rolling_resistance: 0.008,
            battery_capacity: 5000.0,
            constant_power_loss: 20.0,
            panel_temp_coefficient: 0.0016,
        };
        let mut config = RunConfig::default();
        config.sim.max_days = 4;
        Scenario::new(
            spec,
            config,
            Arc::new(Route::from_nodes(nodes).unwrap()),
            Arc::new(WeatherSeries::from_samples(samples).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn default_start_is_first_driving_opening() {
        let s = flat_scenario(800.0);
        assert_eq!(s.sim_config().start_time, SimTime(8 * 3600));
    }

    #[test]
    fn config_toml_round_trip_and_unknown_keys() {
        let mut c = RunConfig::default();
        c.sim.start_time = Some("2023-10-22T08:30".into());
        c.sim.soc_start_wh = Some(2750.0);
        c.strategies.min_speed_kmh = Some(57);
        let text = c.to_toml();
        assert_eq!(RunConfig::parse_toml(&text, "c").unwrap(), c);
        let e = RunConfig::parse_toml("[sim]\nspeed_limit = 3\n", "c").unwrap_err();
        assert!(e.to_string().contains("speed_limit"), "{e}");
    }

    #[test]
    fn off_grid_strategy_speed_rejected() {
        let s = flat_scenario(800.0);
        let mut config = s.config.clone();
        config.strategies.max_speed_kmh = Some(200);
        let e = Scenario::new(s.spec.clone(), config, s.route.clone(), s.weather.clone()).unwrap_err();
        assert!(matches!(e, ScenarioError::Config(_)));
    }

    #[test]
    fn every_strategy_arrives_on_an_easy_route() {
        let s = flat_scenario(900.0);
        for kind in StrategyKind::ALL {
            let run = s.run(kind).unwrap();
            assert!(run.log.finished, "{kind:?}");
            assert_eq!(run.kind(), kind);
        }
    }

    #[test]
    fn dark_weather_is_infeasible_for_average_speed() {
        let dark = flat_scenario(0.0);
        let mut config = dark.config.clone();
        config.sim.soc_start_wh = Some(100.0);
        let s = Scenario::new(dark.spec.clone(), config, dark.route.clone(), dark.weather.clone()).unwrap();
        let e = s.run(StrategyKind::Avg).unwrap_err();
        assert!(e.is_infeasible(), "{e}");
    }
}
