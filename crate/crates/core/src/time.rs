//! Local wall-clock time for the journey.
//!
//! A single timezone is used for the whole trip and there is no DST, so time
//! is a plain count of seconds from a midnight-aligned epoch. Civil date
//! formatting is done by the std companion crate.

use core::fmt;
use core::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

pub const DAY_S: i64 = 86_400;

/// Seconds since 1970-01-01T00:00 local time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(pub i64);

impl SimTime {
    pub const fn from_seconds(s: i64) -> Self {
        SimTime(s)
    }

    pub const fn from_hours(h: i64) -> Self {
        SimTime(h * 3600)
    }

    pub const fn seconds(self) -> i64 {
        self.0
    }

    /// Hour index since the epoch (floor).
    pub fn hour_index(self) -> i64 {
        self.0.div_euclid(3600)
    }

    /// Days since the epoch (floor).
    pub fn day_number(self) -> i64 {
        self.0.div_euclid(DAY_S)
    }

    /// Seconds since local midnight.
    pub fn second_of_day(self) -> i64 {
        self.0.rem_euclid(DAY_S)
    }

    pub fn midnight(self) -> SimTime {
        SimTime(self.day_number() * DAY_S)
    }

    /// Start of the next whole hour strictly after `self`.
    pub fn next_hour_boundary(self) -> SimTime {
        SimTime((self.hour_index() + 1) * 3600)
    }

    pub fn at_second_of_day(self, sod: i64) -> SimTime {
        SimTime(self.midnight().0 + sod)
    }
}

impl Add<i64> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: i64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl Sub for SimTime {
    type Output = i64;
    fn sub(self, rhs: SimTime) -> i64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sod = self.second_of_day();
        write!(
            f,
            "day {} {:02}:{:02}",
            self.day_number(),
            sod / 3600,
            (sod % 3600) / 60
        )
    }
}

/// A half-open window `[start, end)` within a day, in seconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyWindow {
    pub start_s: i64,
    pub end_s: i64,
}

impl DailyWindow {
    pub const fn new(start_s: i64, end_s: i64) -> Self {
        DailyWindow { start_s, end_s }
    }

    pub fn contains_window(&self, other: &DailyWindow) -> bool {
        self.start_s <= other.start_s && other.end_s <= self.end_s
    }

    pub fn start_on(&self, day: SimTime) -> SimTime {
        day.at_second_of_day(self.start_s)
    }

    pub fn end_on(&self, day: SimTime) -> SimTime {
        day.at_second_of_day(self.end_s)
    }

    /// Seconds of `[from, to)` that fall inside this window on any day.
    pub fn overlap_seconds(&self, from: SimTime, to: SimTime) -> i64 {
        if to <= from {
            return 0;
        }
        let mut total = 0;
        let mut day = from.day_number();
        while day * DAY_S < to.0 {
            let ws = day * DAY_S + self.start_s;
            let we = day * DAY_S + self.end_s;
            let lo = ws.max(from.0);
            let hi = we.min(to.0);
            if hi > lo {
                total += hi - lo;
            }
            day += 1;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_across_midnight() {
        let w = DailyWindow::new(6 * 3600 + 1800, 19 * 3600);
        let from = SimTime(19 * 3600);
        let to = SimTime(DAY_S + 8 * 3600);
        assert_eq!(w.overlap_seconds(from, to), 5400);
        assert_eq!(w.overlap_seconds(SimTime(0), SimTime(DAY_S)), 12 * 3600 + 1800);
    }

    #[test]
    fn negative_times_floor() {
        let t = SimTime(-1);
        assert_eq!(t.day_number(), -1);
        assert_eq!(t.second_of_day(), DAY_S - 1);
        assert_eq!(t.hour_index(), -1);
    }
}
