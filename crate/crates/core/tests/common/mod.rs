//! Toy routes, weather and vehicles for integration tests.
#![allow(dead_code)]

use solarsim_core::geo::EARTH_RADIUS_M;
use solarsim_core::{Route, RouteNode, SimTime, VehicleSpec, WeatherSample, WeatherSeries};

/// Small deterministic generator (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

pub fn spec() -> VehicleSpec {
    VehicleSpec {
        panel_area: 4.0,
        panel_efficiency: 0.24,
        system_efficiency: 0.9,
        mass: 300.0,
        drag_coefficient: 0.12,
        frontal_area: 1.0,
        rolling_resistance: 0.008,
        battery_capacity: 5000.0,
        constant_power_loss: 40.0,
        panel_temp_coefficient: 0.0016,
    }
}

/// Eastbound route along the equator with the given leg lengths (km) and
/// node altitudes (m). Zones change every `zone_every` nodes.
pub fn route(legs_km: &[f64], alts: &[f64], zone_every: usize) -> Route {
    assert_eq!(legs_km.len() + 1, alts.len());
    let mut lon = 0.0;
    let mut nodes = Vec::new();
    for (i, &alt) in alts.iter().enumerate() {
        let zone = format!("z{}", i / zone_every.max(1));
        nodes.push(RouteNode::new(0.0, lon, alt, &format!("n{i}"), &zone));
        if let Some(km) = legs_km.get(i) {
            lon += (km * 1000.0 / EARTH_RADIUS_M).to_degrees();
        }
    }
    Route::from_nodes(nodes).unwrap()
}

pub fn flat_route(km: f64) -> Route {
    route(&[km], &[0.0, 0.0], 10)
}

/// Hourly weather with a half-sine daylight curve peaking at `peak_ghi`.
pub fn weather(zones: &[String], days: i64, peak_ghi: f64, temp: f64, wind: f64, wind_dir: f64) -> WeatherSeries {
    let mut v = Vec::new();
    for z in zones {
        for h in 0..days * 24 {
            let hod = (h % 24) as f64 + 0.5;
            let x = (hod - 6.0) / 12.0;
            let ghi = if (0.0..1.0).contains(&x) { peak_ghi * (std::f64::consts::PI * x).sin() } else { 0.0 };
            v.push(WeatherSample {
                zone_id: z.clone(),
                timestamp: SimTime::from_hours(h),
                ghi,
                temperature: temp,
                wind_direction: wind_dir,
                wind_speed: wind,
            });
        }
    }
    WeatherSeries::from_samples(v).unwrap()
}

/// Random weather with per-hour variation for every zone of `route`.
pub fn random_weather(rng: &mut Mix, route: &Route, days: i64) -> WeatherSeries {
    let mut zones: Vec<String> = route.nodes().iter().map(|n| n.weather_zone_id.clone()).collect();
    zones.dedup();
    let mut v = Vec::new();
    for z in &zones {
        let day_scale: Vec<f64> = (0..days).map(|_| rng.range(0.3, 1.0)).collect();
        for h in 0..days * 24 {
            let hod = (h % 24) as f64 + 0.5;
            let x = (hod - 6.0) / 12.0;
            let ghi = if (0.0..1.0).contains(&x) {
                1000.0 * day_scale[(h / 24) as usize] * (std::f64::consts::PI * x).sin()
            } else {
                0.0
            };
            v.push(WeatherSample {
                zone_id: z.clone(),
                timestamp: SimTime::from_hours(h),
                ghi,
                temperature: rng.range(5.0, 40.0),
                wind_direction: rng.range(0.0, 360.0),
                wind_speed: rng.range(0.0, 8.0),
            });
        }
    }
    WeatherSeries::from_samples(v).unwrap()
}

/// Random hilly route of `legs` legs between `min_km` and `max_km` each.
pub fn random_route(rng: &mut Mix, legs: usize, min_km: f64, max_km: f64) -> Route {
    let lens: Vec<f64> = (0..legs).map(|_| rng.range(min_km, max_km)).collect();
    let alts: Vec<f64> = (0..=legs).map(|_| rng.range(0.0, 600.0)).collect();
    route(&lens, &alts, 2)
}

use solarsim_core::engine::EngineError;
use solarsim_core::planner::{self, PlannerError};
use solarsim_core::{Engine, PhysicsConstants, PlannerConfig, SimConfig, VehicleState};

fn random_spec(rng: &mut Mix) -> VehicleSpec {
    VehicleSpec {
        panel_area: rng.range(4.0, 8.0),
        panel_efficiency: rng.range(0.15, 0.3),
        system_efficiency: rng.range(0.8, 0.98),
        mass: rng.range(200.0, 500.0),
        drag_coefficient: rng.range(0.08, 0.18),
        frontal_area: rng.range(0.7, 1.1),
        rolling_resistance: rng.range(0.004, 0.012),
        battery_capacity: rng.range(1000.0, 6000.0),
        constant_power_loss: rng.range(10.0, 50.0),
        panel_temp_coefficient: rng.range(0.0, 0.004),
    }
}

/// Drives random commands (steps at random speeds, idling outside the
/// window) and checks the energy books after every step. Returns the number
/// of steps checked.
pub fn conservation_run(seed: u64, steps: usize, tol_wh: f64) -> Result<usize, String> {
    let mut rng = Mix(seed);
    let mut checked = 0;
    while checked < steps {
        let legs = 1 + rng.below(6) as usize;
        let route = random_route(&mut rng, legs, 20.0, 400.0);
        let weather = random_weather(&mut rng, &route, 20);
        let spec = random_spec(&mut rng);
        let cfg = SimConfig {
            start_time: SimTime::from_hours(8),
            soc_start_wh: Some(rng.range(0.0, 1.0) * spec.battery_capacity),
            speed_min_kmh: 20,
            speed_max_kmh: 120,
            charge_while_driving: rng.below(2) == 0,
            ..Default::default()
        };
        let cap = spec.battery_capacity;
        let engine = Engine::new(spec, PhysicsConstants::default(), &route, &weather, cfg).map_err(|e| e.to_string())?;
        let mut state = engine.new_session().map_err(|e| e.to_string())?;
        while checked < steps && !state.finished {
            let result = if engine.can_drive_at(state.clock) {
                let v = match rng.below(10) {
                    0 => 0.0,
                    _ => (20 + rng.below(101)) as f64,
                };
                engine.step_hour(&state, v).map(|(s, l)| (s, vec![l]))
            } else {
                let until = engine.next_driving_start(state.clock);
                engine.advance_idle(&state, until)
            };
            let (next, logs) = match result {
                Ok(x) => x,
                Err(EngineError::Weather(_)) => break,
                Err(e) => return Err(format!("seed {seed}: {e}")),
            };
            for l in &logs {
                let b = &l.breakdown;
                let lhs = l.battery_wh - l.battery_before_wh;
                let rhs = b.charge - b.consumption_total - b.spilled;
                if (lhs - rhs).abs() > tol_wh {
                    return Err(format!("seed {seed} at {}: delta {lhs} vs books {rhs}", l.hour));
                }
                if !(0.0..=cap).contains(&l.battery_wh) {
                    return Err(format!("seed {seed} at {}: battery {} outside [0, {cap}]", l.hour, l.battery_wh));
                }
                checked += 1;
            }
            state = next;
        }
    }
    Ok(checked)
}

/// Best plan by exhaustive enumeration, ranked exactly like the planner.
pub fn exhaustive_best(engine: &Engine<'_>, root: &VehicleState, grid: &[u32], horizon: u32) -> Option<(planner::PlanScore, Vec<u32>)> {
    let mpw = planner::reference_meters_per_wh(engine);
    let mut best: Option<(planner::PlanScore, Vec<u32>)> = None;
    fn go(
        engine: &Engine<'_>,
        state: &VehicleState,
        depleted: bool,
        speeds: &mut Vec<u32>,
        grid: &[u32],
        horizon: u32,
        mpw: f64,
        best: &mut Option<(planner::PlanScore, Vec<u32>)>,
    ) {
        if state.finished || speeds.len() as u32 == horizon {
            let s = planner::score_of(state, depleted, speeds, mpw);
            if best.as_ref().is_none_or(|(b, _)| s.cmp_key(b).is_lt()) {
                *best = Some((s, speeds.clone()));
            }
            return;
        }
        for &v in grid {
            let Ok(out) = planner::simulate_day(engine, state, v) else {
                continue;
            };
            speeds.push(v);
            go(engine, &out.state, depleted || out.depleted, speeds, grid, horizon, mpw, best);
            speeds.pop();
        }
    }
    go(engine, root, false, &mut Vec::new(), grid, horizon, mpw, &mut best);
    best
}

/// One random toy instance: at most three days and four speeds. Compares the
/// saturating-width beam search with exhaustive enumeration.
/// Returns how the instance resolved: "arrives", "unfinished" or
/// "infeasible".
pub fn planner_oracle_instance(seed: u64) -> Result<&'static str, String> {
    let mut rng = Mix(seed);
    let legs = 1 + rng.below(4) as usize;
    let route = random_route(&mut rng, legs, 100.0, 450.0);
    let weather = random_weather(&mut rng, &route, 6);
    let spec = random_spec(&mut rng);
    let cfg = SimConfig {
        start_time: SimTime::from_hours(8),
        soc_start_wh: Some(rng.range(0.2, 1.0) * spec.battery_capacity),
        speed_min_kmh: 40,
        speed_max_kmh: 100,
        speed_increment_kmh: 20,
        ..Default::default()
    };
    let engine = Engine::new(spec, PhysicsConstants::default(), &route, &weather, cfg).map_err(|e| e.to_string())?;
    let root = engine.new_session().map_err(|e| e.to_string())?;
    let pcfg = PlannerConfig {
        beam_width: 4 * 4 * 4,
        speed_grid_step_kmh: 20,
        horizon_days: 3,
        refine: false,
        ..Default::default()
    };
    let grid = planner::coarse_grid(&engine, &pcfg);
    if grid.len() > 4 {
        return Err(format!("grid {grid:?} has more than four speeds"));
    }
    let (score, speeds) = exhaustive_best(&engine, &root, &grid, 3).ok_or("no sequence evaluated")?;
    match planner::plan_daily_speeds(&engine, &root, &pcfg) {
        Ok(plan) if !score.depleted => {
            if plan.daily_speeds_kmh != speeds {
                return Err(format!("seed {seed}: beam {:?} vs exhaustive {speeds:?}", plan.daily_speeds_kmh));
            }
            let arrival = plan.predicted_arrival.map(|a| a.time_s);
            let oracle = score.finished.then_some(score.primary);
            if arrival != oracle {
                return Err(format!("seed {seed}: arrival {arrival:?} vs exhaustive {oracle:?}"));
            }
            Ok(if score.finished { "arrives" } else { "unfinished" })
        }
        Err(PlannerError::InfeasibleHorizon { .. }) if score.depleted => Ok("infeasible"),
        other => Err(format!(
            "seed {seed}: planner {:?} but exhaustive best {speeds:?} depleted={}",
            other.map(|p| p.daily_speeds_kmh),
            score.depleted
        )),
    }
}

