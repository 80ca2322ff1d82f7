//! Hourly weather grid per zone.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::Route;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeatherError {
    #[error("empty weather series")]
    Empty,
    #[error("invalid sample for zone {zone} at hour {hour}: {reason}")]
    InvalidSample {
        zone: String,
        hour: i64,
        reason: String,
    },
    #[error("duplicate sample for zone {zone} at hour {hour}")]
    Duplicate { zone: String, hour: i64 },
    #[error("sparse series: {} missing (zone, hour) entries", gaps.len())]
    Sparse { gaps: Vec<(String, i64)> },
    #[error("unknown weather zone {0:?}")]
    UnknownZone(String),
    #[error("time {time} outside weather span [{first}, {last}]")]
    OutOfSpan {
        time: SimTime,
        first: SimTime,
        last: SimTime,
    },
    #[error("invalid forecast request: {0}")]
    InvalidRequest(&'static str),
}

/// One hour of weather for one zone. Values hold for the whole hour starting
/// at `timestamp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSample {
    pub zone_id: String,
    pub timestamp: SimTime,
    /// Global horizontal irradiance, W/m².
    pub ghi: f64,
    /// Ambient temperature, °C.
    pub temperature: f64,
    /// Direction the wind blows from, degrees in [0, 360).
    pub wind_direction: f64,
    /// m/s.
    pub wind_speed: f64,
}

impl WeatherSample {
    fn validate(&self) -> Result<(), WeatherError> {
        let bad = |reason: &str| WeatherError::InvalidSample {
            zone: self.zone_id.clone(),
            hour: self.timestamp.hour_index(),
            reason: reason.into(),
        };
        if self.zone_id.is_empty() {
            return Err(bad("empty zone id"));
        }
        if self.timestamp.second_of_day() % 3600 != 0 {
            return Err(bad("timestamp not on the hour"));
        }
        if !(self.ghi >= 0.0) || !self.ghi.is_finite() {
            return Err(bad("ghi must be >= 0"));
        }
        if !(self.wind_speed >= 0.0) || !self.wind_speed.is_finite() {
            return Err(bad("wind speed must be >= 0"));
        }
        if !(0.0..360.0).contains(&self.wind_direction) {
            return Err(bad("wind direction outside [0, 360)"));
        }
        if !self.temperature.is_finite() {
            return Err(bad("temperature is not finite"));
        }
        Ok(())
    }
}

/// Dense (zone × hour) weather grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    zones: Vec<String>,
    zone_index: BTreeMap<String, usize>,
    first_hour: i64,
    hours: usize,
    grid: Vec<WeatherSample>,
}

impl WeatherSeries {
    /// Builds the grid, rejecting invalid values, duplicates and gaps.
    pub fn from_samples(samples: Vec<WeatherSample>) -> Result<Self, WeatherError> {
        if samples.is_empty() {
            return Err(WeatherError::Empty);
        }
        for s in &samples {
            s.validate()?;
        }
        let first_hour = samples.iter().map(|s| s.timestamp.hour_index()).min().unwrap();
        let last_hour = samples.iter().map(|s| s.timestamp.hour_index()).max().unwrap();
        let hours = (last_hour - first_hour + 1) as usize;

        let mut zone_index = BTreeMap::new();
        for s in &samples {
            let next = zone_index.len();
            zone_index.entry(s.zone_id.clone()).or_insert(next);
        }
        // Canonical zone order: sorted by id.
        let zones: Vec<String> = zone_index.keys().cloned().collect();
        for (i, z) in zones.iter().enumerate() {
            *zone_index.get_mut(z).unwrap() = i;
        }

        let mut slots: Vec<Option<WeatherSample>> = Vec::new();
        slots.resize(zones.len() * hours, None);
        for s in samples {
            let zi = zone_index[&s.zone_id];
            let h = (s.timestamp.hour_index() - first_hour) as usize;
            let slot = &mut slots[zi * hours + h];
            if slot.is_some() {
                return Err(WeatherError::Duplicate {
                    zone: s.zone_id,
                    hour: first_hour + h as i64,
                });
            }
            *slot = Some(s);
        }
        let gaps: Vec<(String, i64)> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(i, _)| (zones[i / hours].clone(), first_hour + (i % hours) as i64))
            .collect();
        if !gaps.is_empty() {
            return Err(WeatherError::Sparse { gaps });
        }
        Ok(WeatherSeries {
            zones,
            zone_index,
            first_hour,
            hours,
            grid: slots.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn zones(&self) -> &[String] {
        &self.zones
    }

    pub fn zone_index(&self, zone: &str) -> Option<usize> {
        self.zone_index.get(zone).copied()
    }

    /// First covered hour start.
    pub fn first_time(&self) -> SimTime {
        SimTime::from_hours(self.first_hour)
    }

    /// Start of the last covered hour.
    pub fn last_time(&self) -> SimTime {
        SimTime::from_hours(self.first_hour + self.hours as i64 - 1)
    }

    /// End of coverage (exclusive).
    pub fn end_time(&self) -> SimTime {
        SimTime::from_hours(self.first_hour + self.hours as i64)
    }

    pub fn covers(&self, time: SimTime) -> bool {
        time >= self.first_time() && time < self.end_time()
    }

    /// All samples in canonical (zone, hour) order.
    pub fn samples(&self) -> &[WeatherSample] {
        &self.grid
    }

    fn out_of_span(&self, time: SimTime) -> WeatherError {
        WeatherError::OutOfSpan {
            time,
            first: self.first_time(),
            last: self.last_time(),
        }
    }

    /// Sample of the hour containing `time` for a zone by index.
    pub fn sample_by_index(&self, zone: usize, time: SimTime) -> Result<&WeatherSample, WeatherError> {
        if !self.covers(time) {
            return Err(self.out_of_span(time));
        }
        let h = (time.hour_index() - self.first_hour) as usize;
        Ok(&self.grid[zone * self.hours + h])
    }

    /// Sample of the hour containing `time` (piecewise constant per hour).
    pub fn sample(&self, zone: &str, time: SimTime) -> Result<&WeatherSample, WeatherError> {
        let zi = self
            .zone_index(zone)
            .ok_or_else(|| WeatherError::UnknownZone(zone.into()))?;
        self.sample_by_index(zi, time)
    }

    /// Daily irradiation for a zone on the day containing `day`, kWh/m².
    /// Hours outside the span are skipped.
    pub fn daily_ghi_kwh_m2(&self, zone: &str, day: SimTime) -> Result<f64, WeatherError> {
        let zi = self
            .zone_index(zone)
            .ok_or_else(|| WeatherError::UnknownZone(zone.into()))?;
        let start = day.midnight();
        let mut wh = 0.0;
        for h in 0..24 {
            let t = start + h * 3600;
            if self.covers(t) {
                wh += self.sample_by_index(zi, t)?.ghi;
            }
        }
        Ok(wh / 1000.0)
    }

    /// Conservative per-day bounds over every zone, used by the planner's
    /// pre-filter.
    pub fn day_extremes(&self, day: SimTime) -> DayExtremes {
        let start = day.midnight();
        let mut ex = DayExtremes {
            max_ghi: 0.0,
            min_temperature: f64::INFINITY,
            max_wind_speed: 0.0,
            max_temperature: f64::NEG_INFINITY,
        };
        for zi in 0..self.zones.len() {
            for h in 0..24 {
                let t = start + h * 3600;
                if let Ok(s) = self.sample_by_index(zi, t) {
                    ex.max_ghi = ex.max_ghi.max(s.ghi);
                    ex.min_temperature = ex.min_temperature.min(s.temperature);
                    ex.max_temperature = ex.max_temperature.max(s.temperature);
                    ex.max_wind_speed = ex.max_wind_speed.max(s.wind_speed);
                }
            }
        }
        if !ex.min_temperature.is_finite() {
            ex.min_temperature = 25.0;
            ex.max_temperature = 25.0;
        }
        ex
    }
}

/// Extremes of one day's weather across all zones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayExtremes {
    pub max_ghi: f64,
    pub min_temperature: f64,
    pub max_temperature: f64,
    pub max_wind_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub hour: SimTime,
    pub odometer: f64,
    pub zone: String,
    pub sample: WeatherSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub entries: Vec<ForecastEntry>,
    /// The projection ran past the end of the weather series.
    pub span_exhausted: bool,
}

/// Weather the vehicle would meet over the next `horizon` hours at a constant
/// `assumed_speed_kmh`, starting from `start_odometer` at `start_time`.
/// Entry `k` is the position after `k` hours and the sample of that hour.
pub fn forecast_along(
    route: &Route,
    series: &WeatherSeries,
    start_odometer: f64,
    start_time: SimTime,
    assumed_speed_kmh: f64,
    horizon: u32,
) -> Result<Forecast, WeatherError> {
    if !(assumed_speed_kmh > 0.0) {
        return Err(WeatherError::InvalidRequest("assumed speed must be > 0"));
    }
    if horizon == 0 {
        return Err(WeatherError::InvalidRequest("horizon must be >= 1"));
    }
    let total = route.total_length();
    let mut entries = Vec::with_capacity(horizon as usize);
    let mut span_exhausted = false;
    for k in 1..=horizon {
        let odometer = (start_odometer + assumed_speed_kmh * 1000.0 * k as f64).min(total);
        let hour = start_time + i64::from(k) * 3600;
        if !series.covers(hour) {
            span_exhausted = true;
            break;
        }
        let zone = route.zone_at(odometer);
        let sample = series.sample(zone, hour)?.clone();
        entries.push(ForecastEntry {
            hour,
            odometer,
            zone: zone.into(),
            sample,
        });
    }
    Ok(Forecast {
        entries,
        span_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{RouteNode, EARTH_RADIUS_M};
    use alloc::format;
    use crate::time::DAY_S;
    use alloc::vec;

    fn sample(zone: &str, hour: i64, ghi: f64) -> WeatherSample {
        WeatherSample {
            zone_id: zone.into(),
            timestamp: SimTime::from_hours(hour),
            ghi,
            temperature: 25.0,
            wind_direction: 90.0,
            wind_speed: 3.0,
        }
    }

    fn grid(zones: &[&str], hours: i64) -> Vec<WeatherSample> {
        let mut v = Vec::new();
        for z in zones {
            for h in 0..hours {
                v.push(sample(z, h, (h * 10) as f64));
            }
        }
        v
    }

    #[test]
    fn two_zones_full_day() {
        let s = WeatherSeries::from_samples(grid(&["a", "b"], 24)).unwrap();
        assert_eq!(s.end_time() - s.first_time(), 24 * 3600);
        assert_eq!(s.zones(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn missing_hour_is_sparse() {
        let mut v = grid(&["a", "b"], 24);
        v.retain(|s| !(s.zone_id == "b" && s.timestamp.hour_index() == 7));
        match WeatherSeries::from_samples(v).unwrap_err() {
            WeatherError::Sparse { gaps } => assert_eq!(gaps, vec![("b".to_string(), 7)]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn negative_values_rejected() {
        let mut v = grid(&["a"], 2);
        v[1].ghi = -1.0;
        assert!(matches!(
            WeatherSeries::from_samples(v).unwrap_err(),
            WeatherError::InvalidSample { .. }
        ));
        let mut v = grid(&["a"], 2);
        v[0].wind_speed = -0.1;
        assert!(WeatherSeries::from_samples(v).is_err());
    }

    #[test]
    fn floor_rule_and_lookup_errors() {
        let s = WeatherSeries::from_samples(grid(&["a"], 24)).unwrap();
        assert_eq!(s.sample("a", SimTime::from_hours(5)).unwrap().ghi, 50.0);
        assert_eq!(s.sample("a", SimTime::from_hours(5) + 1800).unwrap().ghi, 50.0);
        assert!(matches!(s.sample("zz", SimTime(0)), Err(WeatherError::UnknownZone(_))));
        assert!(matches!(
            s.sample("a", SimTime::from_hours(24)),
            Err(WeatherError::OutOfSpan { .. })
        ));
        assert_eq!(
            s.sample("a", SimTime::from_hours(3)).unwrap(),
            s.sample("a", SimTime::from_hours(3)).unwrap()
        );
    }

    #[test]
    fn daily_ghi_matches_hand_sum() {
        let s = WeatherSeries::from_samples(grid(&["a"], 48)).unwrap();
        // sum_{h=0}^{23} 10h = 2760 Wh/m²
        let d = s.daily_ghi_kwh_m2("a", SimTime(0)).unwrap();
        assert!((d - 2.76).abs() / 2.76 < 1e-9);
        let d2 = s.daily_ghi_kwh_m2("a", SimTime(DAY_S)).unwrap();
        let hand: f64 = (24..48).map(|h| (h * 10) as f64).sum::<f64>() / 1000.0;
        assert!((d2 - hand).abs() / hand < 1e-9);
    }

    fn two_zone_route() -> Route {
        // Boundary at 50 km, total 100 km along the equator.
        let deg = |m: f64| (m / EARTH_RADIUS_M).to_degrees();
        Route::from_nodes(vec![
            RouteNode::new(0.0, 0.0, 0.0, "a", "z1"),
            RouteNode::new(0.0, deg(50_000.0), 0.0, "b", "z2"),
            RouteNode::new(0.0, deg(100_000.0), 0.0, "c", "z2"),
        ])
        .unwrap()
    }

    #[test]
    fn forecast_crosses_zone_boundary() {
        let r = two_zone_route();
        let s = WeatherSeries::from_samples(grid(&["z1", "z2"], 24)).unwrap();
        let f = forecast_along(&r, &s, 0.0, SimTime::from_hours(8), 60.0, 1).unwrap();
        assert_eq!(f.entries.len(), 1);
        assert_eq!(f.entries[0].zone, "z2");
        let f = forecast_along(&r, &s, 0.0, SimTime::from_hours(8), 30.0, 1).unwrap();
        assert_eq!(f.entries[0].zone, "z1");
        assert!(forecast_along(&r, &s, 0.0, SimTime(0), 0.0, 1).is_err());
        assert!(forecast_along(&r, &s, 0.0, SimTime(0), 10.0, 0).is_err());
    }

    #[test]
    fn forecast_truncates_at_span_end() {
        let r = two_zone_route();
        let s = WeatherSeries::from_samples(grid(&["z1", "z2"], 24)).unwrap();
        let f = forecast_along(&r, &s, 0.0, SimTime::from_hours(20), 1.0, 10).unwrap();
        assert!(f.span_exhausted);
        assert_eq!(f.entries.len(), 3);
        let msg = format!("{}", WeatherError::UnknownZone("q".into()));
        assert!(msg.contains("q"));
    }

    #[test]
    fn slow_forecast_on_single_zone_stays_put() {
        let deg = |m: f64| (m / EARTH_RADIUS_M).to_degrees();
        let r = Route::from_nodes(vec![
            RouteNode::new(0.0, 0.0, 0.0, "a", "only"),
            RouteNode::new(0.0, deg(1000.0), 0.0, "b", "only"),
        ])
        .unwrap();
        let s = WeatherSeries::from_samples(grid(&["only"], 24)).unwrap();
        let f = forecast_along(&r, &s, 0.0, SimTime(0), 1e-6, 12).unwrap();
        assert!(f.entries.iter().all(|e| e.zone == "only"));
    }
}
