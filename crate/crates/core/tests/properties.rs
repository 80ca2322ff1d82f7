mod common;

use common::Mix;
use proptest::prelude::*;
use solarsim_core::engine::ConstantSpeed;
use solarsim_core::planner::{self, PlannerConfig};
use solarsim_core::{Engine, PhysicsConstants, SimConfig, SimTime};

fn cfg(soc: f64) -> SimConfig {
    SimConfig {
        start_time: SimTime::from_hours(8),
        soc_start_wh: Some(soc),
        speed_min_kmh: 30,
        speed_max_kmh: 110,
        ..Default::default()
    }
}

#[test]
fn identical_inputs_give_identical_journeys() {
    let mut rng = Mix(9);
    let route = common::random_route(&mut rng, 5, 50.0, 200.0);
    let weather = common::random_weather(&mut rng, &route, 8);
    let engine = Engine::new(common::spec(), PhysicsConstants::default(), &route, &weather, cfg(3000.0)).unwrap();
    let s0 = engine.new_session().unwrap();
    let a = engine.run_to_finish(&s0, &mut ConstantSpeed(60), 8).unwrap();
    let b = engine.run_to_finish(&s0, &mut ConstantSpeed(60), 8).unwrap();
    assert_eq!(a, b);
    let pc = PlannerConfig::default();
    let p1 = planner::plan_daily_speeds(&engine, &s0, &pc);
    let p2 = planner::plan_daily_speeds(&engine, &s0, &pc);
    assert_eq!(p1, p2);
}

#[test]
fn reversed_route_has_same_length_and_mirrored_profile() {
    let mut rng = Mix(3);
    let route = common::random_route(&mut rng, 7, 5.0, 40.0);
    let rev = route.reversed();
    let len = route.total_length();
    assert!((rev.total_length() - len).abs() < 1e-6 * len);
    let fwd = route.elevation_profile(0.0, len, 1000.0).unwrap();
    let back = rev.elevation_profile(0.0, rev.total_length(), 1000.0).unwrap();
    for (d, alt) in fwd.iter().step_by(5) {
        let mirrored = rev.locate(rev.total_length() - d).unwrap().altitude;
        assert!((mirrored - alt).abs() < 1e-6, "at {d}: {alt} vs {mirrored}");
    }
    assert_eq!(fwd.first().unwrap().1, back.last().unwrap().1);
    assert_eq!(rev.reversed().nodes(), route.nodes());
}

#[test]
fn replan_after_a_slow_day_does_not_slow_down() {
    let route = common::flat_route(1200.0);
    let zones = vec!["z0".to_string()];
    let weather = common::weather(&zones, 8, 900.0, 25.0, 0.0, 0.0);
    let engine = Engine::new(common::spec(), PhysicsConstants::default(), &route, &weather, cfg(4000.0)).unwrap();
    let s0 = engine.new_session().unwrap();
    let pc = PlannerConfig::default();
    let plan = planner::plan_daily_speeds(&engine, &s0, &pc).unwrap();
    // Drive day 1 well under the plan, then replan from the evening state.
    let slow = plan.daily_speeds_kmh[0].saturating_sub(20).max(30);
    let (s1, _) = engine.run_day(&s0, &mut ConstantSpeed(slow)).unwrap();
    let again = planner::replan(&engine, &s1, &pc).unwrap();
    assert_eq!(again.start_day, s1.day_index + 1);
    assert!(
        again.daily_speeds_kmh[0] >= plan.daily_speeds_kmh[1],
        "after a slow day the next speed should not drop: {:?} then {:?}",
        plan.daily_speeds_kmh,
        again.daily_speeds_kmh
    );
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn battery_stays_within_capacity(seed in any::<u64>(), speed in 30u32..=110) {
        let mut rng = Mix(seed);
        let route = common::random_route(&mut rng, 3, 20.0, 150.0);
        let weather = common::random_weather(&mut rng, &route, 6);
        let spec = common::spec();
        let cap = spec.battery_capacity;
        let engine = Engine::new(spec, PhysicsConstants::default(), &route, &weather, cfg(rng.range(0.0, cap))).unwrap();
        let s0 = engine.new_session().unwrap();
        let log = engine.run_to_finish(&s0, &mut ConstantSpeed(speed), 5).unwrap();
        prop_assert!(log.min_battery_wh >= 0.0 && log.max_battery_wh <= cap);
        prop_assert!(log.total_distance_m <= route.total_length() + 1e-6);
    }

    #[test]
    fn halving_substep_barely_moves_totals(seed in any::<u64>()) {
        let mut rng = Mix(seed);
        let route = common::random_route(&mut rng, 4, 10.0, 120.0);
        let weather = common::random_weather(&mut rng, &route, 6);
        let base = cfg(2500.0);
        let fine = SimConfig { max_substep_s: base.max_substep_s / 2.0, ..base.clone() };
        let a = Engine::new(common::spec(), PhysicsConstants::default(), &route, &weather, base).unwrap();
        let b = Engine::new(common::spec(), PhysicsConstants::default(), &route, &weather, fine).unwrap();
        let la = a.run_to_finish(&a.new_session().unwrap(), &mut ConstantSpeed(70), 5).unwrap();
        let lb = b.run_to_finish(&b.new_session().unwrap(), &mut ConstantSpeed(70), 5).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1.0);
        prop_assert!(rel(la.totals.consumption_total, lb.totals.consumption_total) < 1e-4);
        prop_assert!(rel(la.totals.charge, lb.totals.charge) < 1e-4);
    }
}
