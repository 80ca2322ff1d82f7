//! Route geometry: nodes, derived segments and odometer queries.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{asin, atan, atan2, cos, sin, sqrt};
use serde::{Deserialize, Serialize};

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("degenerate route: need at least 2 nodes, got {0}")]
    Degenerate(usize),
    #[error("invalid node {index}: {reason}")]
    InvalidNode { index: usize, reason: String },
    #[error("zero-length segment between nodes {0} and {1}")]
    ZeroLengthSegment(usize, usize),
    #[error("odometer {odometer} m outside route [0, {total}] m")]
    OutOfRange { odometer: f64, total: f64 },
    #[error("invalid range: from {from} m to {to} m every {every} m")]
    InvalidRange { from: f64, to: f64, every: f64 },
}

/// A geographic route node as found in route files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteNode {
    #[serde(rename = "lat")]
    pub latitude: f64,
    #[serde(rename = "lon")]
    pub longitude: f64,
    #[serde(rename = "alt_m")]
    pub altitude: f64,
    #[serde(rename = "name")]
    pub area_name: String,
    #[serde(rename = "zone")]
    pub weather_zone_id: String,
}

impl RouteNode {
    pub fn new(lat: f64, lon: f64, alt: f64, name: &str, zone: &str) -> Self {
        RouteNode {
            latitude: lat,
            longitude: lon,
            altitude: alt,
            area_name: name.into(),
            weather_zone_id: zone.into(),
        }
    }

    fn validate(&self, index: usize) -> Result<(), RouteError> {
        let bad = |reason: &str| RouteError::InvalidNode {
            index,
            reason: reason.into(),
        };
        if !self.latitude.is_finite() || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(bad("latitude outside [-90, 90]"));
        }
        if !self.longitude.is_finite() || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(bad("longitude outside [-180, 180]"));
        }
        if !self.altitude.is_finite() {
            return Err(bad("altitude is not finite"));
        }
        if self.weather_zone_id.is_empty() {
            return Err(bad("empty weather zone id"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteSegment {
    pub start_node_index: usize,
    /// Along-road length including the altitude change, meters.
    pub length: f64,
    /// Initial great-circle bearing, degrees clockwise from true north in [0, 360).
    pub heading: f64,
    /// Road incline, radians.
    pub incline: f64,
    /// Signed altitude difference end - start, meters.
    pub elevation_change: f64,
}

/// Great-circle distance between two (lat, lon) points in degrees.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let p1 = lat1.to_radians();
    let p2 = lat2.to_radians();
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let s1 = sin(dp / 2.0);
    let s2 = sin(dl / 2.0);
    let a = s1 * s1 + cos(p1) * cos(p2) * s2 * s2;
    2.0 * EARTH_RADIUS_M * asin(sqrt(a.min(1.0)))
}

/// Initial bearing from point 1 to point 2, degrees in [0, 360).
pub fn initial_bearing_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let p1 = lat1.to_radians();
    let p2 = lat2.to_radians();
    let dl = (lon2 - lon1).to_radians();
    let y = sin(dl) * cos(p2);
    let x = cos(p1) * sin(p2) - sin(p1) * cos(p2) * cos(dl);
    normalize_deg(atan2(y, x).to_degrees())
}

/// Wrap an angle in degrees into [0, 360).
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg % 360.0;
    let r = if r < 0.0 { r + 360.0 } else { r };
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Geometry of the segment from `a` to `b`.
pub fn segment_geometry(a: &RouteNode, b: &RouteNode) -> Result<RouteSegment, RouteError> {
    let horizontal = haversine_m(a.latitude, a.longitude, b.latitude, b.longitude);
    if !(horizontal > 0.0) {
        return Err(RouteError::ZeroLengthSegment(0, 1));
    }
    let dh = b.altitude - a.altitude;
    Ok(RouteSegment {
        start_node_index: 0,
        length: sqrt(horizontal * horizontal + dh * dh),
        heading: initial_bearing_deg(a.latitude, a.longitude, b.latitude, b.longitude),
        incline: atan(dh / horizontal),
        elevation_change: dh,
    })
}

/// Interpolated position on the route.
#[derive(Debug, Clone, PartialEq)]
pub struct Position<'a> {
    pub segment_index: usize,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
    pub heading: f64,
    pub weather_zone_id: &'a str,
}

/// An immutable, validated route with derived segment geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    nodes: Vec<RouteNode>,
    segments: Vec<RouteSegment>,
    cumulative: Vec<f64>,
}

impl Route {
    pub fn from_nodes(nodes: Vec<RouteNode>) -> Result<Self, RouteError> {
        if nodes.len() < 2 {
            return Err(RouteError::Degenerate(nodes.len()));
        }
        for (i, n) in nodes.iter().enumerate() {
            n.validate(i)?;
        }
        let mut segments = Vec::with_capacity(nodes.len() - 1);
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(0.0);
        let mut total = 0.0;
        for (i, pair) in nodes.windows(2).enumerate() {
            let mut seg = segment_geometry(&pair[0], &pair[1]).map_err(|e| match e {
                RouteError::ZeroLengthSegment(..) => RouteError::ZeroLengthSegment(i, i + 1),
                other => other,
            })?;
            seg.start_node_index = i;
            total += seg.length;
            cumulative.push(total);
            segments.push(seg);
        }
        Ok(Route {
            nodes,
            segments,
            cumulative,
        })
    }

    pub fn nodes(&self) -> &[RouteNode] {
        &self.nodes
    }

    pub fn segments(&self) -> &[RouteSegment] {
        &self.segments
    }

    pub fn cumulative_distance(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Index of the segment containing `odometer`. A point exactly on a node
    /// belongs to the segment starting there; the route end belongs to the
    /// last segment.
    pub fn segment_index_at(&self, odometer: f64) -> usize {
        let k = self.cumulative.partition_point(|&c| c <= odometer);
        k.saturating_sub(1).min(self.segments.len() - 1)
    }

    /// Distance from the start to the end of segment `index`.
    pub fn segment_end(&self, index: usize) -> f64 {
        self.cumulative[index + 1]
    }

    /// Weather zone of the segment containing `odometer`.
    pub fn zone_at(&self, odometer: f64) -> &str {
        let seg = &self.segments[self.segment_index_at(odometer)];
        &self.nodes[seg.start_node_index].weather_zone_id
    }

    pub fn locate(&self, odometer: f64) -> Result<Position<'_>, RouteError> {
        let total = self.total_length();
        if !(0.0..=total).contains(&odometer) {
            return Err(RouteError::OutOfRange { odometer, total });
        }
        let i = self.segment_index_at(odometer);
        let seg = &self.segments[i];
        let a = &self.nodes[i];
        let b = &self.nodes[i + 1];
        let f = ((odometer - self.cumulative[i]) / seg.length).clamp(0.0, 1.0);
        let lerp = |x: f64, y: f64| x + (y - x) * f;
        Ok(Position {
            segment_index: i,
            latitude: lerp(a.latitude, b.latitude),
            longitude: lerp(a.longitude, b.longitude),
            altitude: lerp(a.altitude, b.altitude),
            heading: seg.heading,
            weather_zone_id: &a.weather_zone_id,
        })
    }

    /// Altitude samples every `sample_every` meters over `[from, to]`, both
    /// endpoints included.
    pub fn elevation_profile(
        &self,
        from: f64,
        to: f64,
        sample_every: f64,
    ) -> Result<Vec<(f64, f64)>, RouteError> {
        let total = self.total_length();
        if !(from >= 0.0 && from < to && to <= total && sample_every > 0.0) {
            return Err(RouteError::InvalidRange {
                from,
                to,
                every: sample_every,
            });
        }
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let d = from + k as f64 * sample_every;
            if d >= to - 1e-9 * to.max(1.0) {
                break;
            }
            out.push((d, self.locate(d)?.altitude));
            k += 1;
        }
        out.push((to, self.locate(to)?.altitude));
        Ok(out)
    }

    /// The same route driven in the opposite direction.
    pub fn reversed(&self) -> Route {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Route::from_nodes(nodes).expect("reversal of a valid route is valid")
    }

    /// Lowest and highest node altitude.
    pub fn altitude_range(&self) -> (f64, f64) {
        self.nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| {
            (lo.min(n.altitude), hi.max(n.altitude))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn node(lat: f64, lon: f64, alt: f64) -> RouteNode {
        RouteNode::new(lat, lon, alt, "n", "z")
    }

    /// Spherical law of cosines, independent of the haversine form.
    fn cosine_law_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
        let dl = (lon2 - lon1).to_radians();
        let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_M * c.acos()
    }

    #[test]
    fn one_degree_of_latitude() {
        let r = Route::from_nodes(vec![node(0.0, 0.0, 0.0), node(1.0, 0.0, 0.0)]).unwrap();
        let expected = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;
        assert!((r.total_length() - 111_195.0).abs() / 111_195.0 < 1e-3);
        assert!((r.total_length() - expected).abs() < 1e-6);
        let oracle = cosine_law_distance(0.0, 0.0, 1.0, 0.0);
        assert!((r.total_length() - oracle).abs() < 1e-3);
    }

    #[test]
    fn haversine_matches_cosine_law() {
        for &(a, b, c, d) in &[
            (-12.46, 130.84, -14.47, 132.26),
            (-23.70, 133.88, -29.01, 134.75),
            (10.0, -5.0, 12.5, 3.0),
        ] {
            let h = haversine_m(a, b, c, d);
            let o = cosine_law_distance(a, b, c, d);
            assert!((h - o).abs() / o < 1e-9, "{h} vs {o}");
        }
    }

    #[test]
    fn identical_nodes_are_zero_length() {
        let err = Route::from_nodes(vec![node(1.0, 1.0, 0.0), node(1.0, 1.0, 0.0)]).unwrap_err();
        assert_eq!(err, RouteError::ZeroLengthSegment(0, 1));
        assert!(alloc::format!("{err}").contains("zero-length segment"));
    }

    #[test]
    fn degenerate_and_out_of_bounds() {
        assert_eq!(
            Route::from_nodes(vec![node(0.0, 0.0, 0.0)]).unwrap_err(),
            RouteError::Degenerate(1)
        );
        let err = Route::from_nodes(vec![node(0.0, 0.0, 0.0), node(95.0, 0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, RouteError::InvalidNode { index: 1, .. }));
        let mut bad = node(0.0, 0.0, 0.0);
        bad.weather_zone_id.clear();
        let err = Route::from_nodes(vec![node(0.0, 1.0, 0.0), bad]).unwrap_err();
        assert!(matches!(err, RouteError::InvalidNode { index: 1, .. }));
    }

    #[test]
    fn flat_segment_geometry() {
        let s = segment_geometry(&node(0.0, 0.0, 50.0), &node(0.0, 0.1, 50.0)).unwrap();
        assert_eq!(s.elevation_change, 0.0);
        assert_eq!(s.incline, 0.0);
        assert!((s.heading - 90.0).abs() < 1e-9);
    }

    #[test]
    fn incline_of_one_percent_grade() {
        // 10 km horizontal along the equator: longitude span of 10 km.
        let dlon = (10_000.0 / EARTH_RADIUS_M).to_degrees();
        let s = segment_geometry(&node(0.0, 0.0, 0.0), &node(0.0, dlon, 100.0)).unwrap();
        assert!((s.incline - 0.009_999_666_686_665_238).abs() < 1e-9, "{}", s.incline);
        assert!((s.length - sqrt(10_000.0f64.powi(2) + 100.0f64.powi(2))).abs() < 1e-6);
    }

    #[test]
    fn locate_boundaries_and_midpoint() {
        let dlon = (1000.0 / EARTH_RADIUS_M).to_degrees();
        let r = Route::from_nodes(vec![
            RouteNode::new(0.0, 0.0, 10.0, "a", "z1"),
            RouteNode::new(0.0, dlon, 30.0, "b", "z2"),
        ])
        .unwrap();
        let p0 = r.locate(0.0).unwrap();
        assert_eq!((p0.latitude, p0.longitude, p0.altitude), (0.0, 0.0, 10.0));
        let pend = r.locate(r.total_length()).unwrap();
        assert_eq!(pend.altitude, 30.0);
        assert!((pend.longitude - dlon).abs() < 1e-15);
        let mid = r.locate(r.total_length() / 2.0).unwrap();
        assert!((mid.altitude - 20.0).abs() < 1e-9);
        assert_eq!(mid.weather_zone_id, "z1");
        assert!(matches!(r.locate(-1.0), Err(RouteError::OutOfRange { .. })));
        assert!(matches!(r.locate(r.total_length() + 1.0), Err(RouteError::OutOfRange { .. })));
    }

    #[test]
    fn elevation_profile_on_linear_ramp() {
        // 0 -> 100 m over 10 km horizontal; sampling is by along-road distance
        // so scale the step to the 3-D length.
        let dlon = (10_000.0 / EARTH_RADIUS_M).to_degrees();
        let r = Route::from_nodes(vec![node(0.0, 0.0, 0.0), node(0.0, dlon, 100.0)]).unwrap();
        let total = r.total_length();
        let prof = r.elevation_profile(0.0, total, total / 4.0).unwrap();
        let alts: Vec<f64> = prof.iter().map(|p| p.1).collect();
        assert_eq!(alts.len(), 5);
        for (a, e) in alts.iter().zip([0.0, 25.0, 50.0, 75.0, 100.0]) {
            assert!((a - e).abs() < 1e-9, "{alts:?}");
        }
        let two = r.elevation_profile(0.0, total, total * 2.0).unwrap();
        assert_eq!(two.len(), 2);
        assert!(r.elevation_profile(total, 0.0, 10.0).is_err());
    }

    #[test]
    fn constant_altitude_profile() {
        let r = Route::from_nodes(vec![node(0.0, 0.0, 7.0), node(0.1, 0.0, 7.0), node(0.2, 0.0, 7.0)])
            .unwrap();
        let prof = r.elevation_profile(0.0, r.total_length(), 1234.0).unwrap();
        assert!(prof.iter().all(|p| p.1 == 7.0));
        assert!(prof.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
