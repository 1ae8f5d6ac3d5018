//! Italian three-band time-of-use classification and hourly rate lookup.
//!
//! Hours are labelled 1..=24; hour `h` is the interval ending at `h:00`, so
//! hour 24 of a day is the last hour before midnight and stays on that
//! day's row.

use std::fmt;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BandRates, TariffSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    F1,
    F2,
    F3,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::F1 => "F1",
            Band::F2 => "F2",
            Band::F3 => "F3",
        })
    }
}

impl BandRates {
    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::F1 => self.f1,
            Band::F2 => self.f2,
            Band::F3 => self.f3,
        }
    }
}

/// Band of `hour` (1..=24) on `weekday`.
///
/// # Panics
/// If `hour` is outside 1..=24.
pub fn band_of(weekday: Weekday, hour: u8) -> Band {
    assert!(
        (1..=24).contains(&hour),
        "hour label must be in 1..=24, got {hour}"
    );
    match weekday {
        Weekday::Sun => Band::F3,
        Weekday::Sat => match hour {
            8..=23 => Band::F2,
            _ => Band::F3,
        },
        _ => match hour {
            9..=19 => Band::F1,
            8 | 20..=23 => Band::F2,
            _ => Band::F3,
        },
    }
}

/// Calendar label of one hourly sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourLabel {
    pub date: NaiveDate,
    pub hour: u8,
}

impl HourLabel {
    pub fn new(date: NaiveDate, hour: u8) -> Result<Self> {
        if !(1..=24).contains(&hour) {
            return Err(Error::domain(format!(
                "hour label must be in 1..=24, got {hour}"
            )));
        }
        Ok(HourLabel { date, hour })
    }

    /// Label of the hour starting at `ts`.
    pub fn starting_at(ts: NaiveDateTime) -> Self {
        HourLabel {
            date: ts.date(),
            hour: ts.hour() as u8 + 1,
        }
    }

    /// The 24 labels of `date`.
    pub fn day(date: NaiveDate) -> impl Iterator<Item = HourLabel> {
        (1..=24).map(move |hour| HourLabel { date, hour })
    }

    pub fn band(&self, holidays: &[NaiveDate]) -> Band {
        if holidays.contains(&self.date) {
            Band::F3
        } else {
            band_of(self.date.weekday(), self.hour)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Buy,
    Sell,
}

/// €/kWh rate at every labelled hour.
pub fn rate_series(schedule: &TariffSchedule, kind: RateKind, span: &[HourLabel]) -> Vec<f64> {
    let rates = match kind {
        RateKind::Buy => &schedule.buy_eur_per_kwh,
        RateKind::Sell => &schedule.sell_eur_per_kwh,
    };
    span.iter()
        .map(|h| rates.get(h.band(&schedule.holidays)))
        .collect()
}

/// All rates needed to price one dispatch horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRates {
    pub buy: Vec<f64>,
    pub sell: Vec<f64>,
    /// Sharing incentive plus avoided transmission charge.
    pub share: Vec<f64>,
}

impl HourlyRates {
    pub fn from_schedule(schedule: &TariffSchedule, span: &[HourLabel]) -> Self {
        let share = schedule.share_eur_per_kwh + schedule.transmission_eur_per_kwh;
        HourlyRates {
            buy: rate_series(schedule, RateKind::Buy, span),
            sell: rate_series(schedule, RateKind::Sell, span),
            share: vec![share; span.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.buy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buy.is_empty()
    }
}
