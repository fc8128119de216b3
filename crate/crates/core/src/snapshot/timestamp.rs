use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Granularity at which a [`Timestamp`] was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    Second,
    Day,
    Month,
}

/// A civil (timezone-naive) point or period in time.
///
/// Ordering compares the earliest instant of the represented period. Two
/// timestamps starting at the same instant order the finer precision first,
/// so `2024-11-01` < `2024-11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Timestamp {
    start: NaiveDateTime,
    precision: Precision,
}

impl Timestamp {
    pub fn month(year: i32, month: u32) -> Result<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, 1)
            .ok_or_else(|| Error::InvalidTimestamp(format!("{year:04}-{month:02}")))?;
        Ok(Self {
            start: date.and_hms_opt(0, 0, 0).expect("midnight"),
            precision: Precision::Month,
        })
    }

    pub fn day(year: i32, month: u32, day: u32) -> Result<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| Error::InvalidTimestamp(format!("{year:04}-{month:02}-{day:02}")))?;
        Ok(Self {
            start: date.and_hms_opt(0, 0, 0).expect("midnight"),
            precision: Precision::Day,
        })
    }

    pub fn from_datetime(start: NaiveDateTime) -> Self {
        Self {
            start,
            precision: Precision::Second,
        }
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// First instant of the represented period.
    pub fn start(&self) -> NaiveDateTime {
        self.start
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.start.cmp(&other.start).then(self.precision.cmp(&other.precision))
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidTimestamp(s.to_string());
        let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        match s.len() {
            7 => {
                let (y, m) = (&s[..4], &s[5..]);
                if s.as_bytes()[4] != b'-' || !all_digits(y) || !all_digits(m) {
                    return Err(bad());
                }
                Timestamp::month(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?).map_err(|_| bad())
            }
            10 => NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .filter(|d| d.format("%Y-%m-%d").to_string() == s)
                .map(|d| Timestamp {
                    start: d.and_hms_opt(0, 0, 0).expect("midnight"),
                    precision: Precision::Day,
                })
                .ok_or_else(bad),
            19 => NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                .ok()
                .filter(|d| d.format("%Y-%m-%dT%H:%M:%S").to_string() == s)
                .map(Timestamp::from_datetime)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pattern = match self.precision {
            Precision::Month => "%Y-%m",
            Precision::Day => "%Y-%m-%d",
            Precision::Second => "%Y-%m-%dT%H:%M:%S",
        };
        write!(f, "{}", self.start.format(pattern))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
