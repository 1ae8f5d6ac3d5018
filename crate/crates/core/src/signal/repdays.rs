use std::fmt;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tariff::HourLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];

    /// Meteorological season: Dec–Feb, Mar–May, Jun–Aug, Sep–Nov.
    pub fn of_month(month: u32) -> Season {
        match month {
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            9..=11 => Season::Fall,
            _ => Season::Winter,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Mid-season reference date of `year`.
    pub fn midpoint(self, year: i32) -> NaiveDate {
        let month = match self {
            Season::Winter => 2,
            Season::Spring => 5,
            Season::Summer => 8,
            Season::Fall => 11,
        };
        NaiveDate::from_ymd_opt(year, month, 15).expect("valid mid-season date")
    }

    /// The Wednesday nearest to the season midpoint of `year`.
    pub fn representative_date(self, year: i32) -> NaiveDate {
        let mid = self.midpoint(year);
        let ahead = (Weekday::Wed.num_days_from_monday() as i64
            - mid.weekday().num_days_from_monday() as i64)
            .rem_euclid(7);
        if ahead <= 3 {
            mid + Duration::days(ahead)
        } else {
            mid - Duration::days(7 - ahead)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Representative dates for a series starting at `start` and spanning
/// `hours`: the year of the series midpoint decides.
pub fn representative_dates(start: NaiveDateTime, hours: f64) -> [NaiveDate; 4] {
    let mid = start + Duration::seconds((hours * 1800.0) as i64);
    Season::ALL.map(|s| s.representative_date(mid.year()))
}

/// Four labelled 24-hour profiles, winter first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeDays {
    pub dates: [NaiveDate; 4],
    pub profiles: [Vec<f64>; 4],
}

impl RepresentativeDays {
    pub const HOURS: usize = 24;

    pub fn new(dates: [NaiveDate; 4], profiles: [Vec<f64>; 4]) -> Result<Self> {
        for (s, p) in Season::ALL.iter().zip(&profiles) {
            if p.len() != Self::HOURS {
                return Err(Error::Structure(format!(
                    "{s} profile has {} values, expected {}",
                    p.len(),
                    Self::HOURS
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Structure(format!(
                    "{s} profile has non-finite values"
                )));
            }
        }
        Ok(RepresentativeDays { dates, profiles })
    }

    pub fn profile(&self, season: Season) -> &[f64] {
        &self.profiles[season.index()]
    }

    /// The four days back to back (96 values).
    pub fn concatenated(&self) -> Vec<f64> {
        self.profiles.concat()
    }

    /// Calendar labels of the 96 concatenated hours.
    pub fn hour_labels(&self) -> Vec<HourLabel> {
        self.dates.iter().flat_map(|&d| HourLabel::day(d)).collect()
    }

    /// Σ over the four days of each profile's total.
    pub fn total(&self) -> f64 {
        self.profiles.iter().flatten().sum()
    }
}
