//! Shared domain types and configuration validation.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigViolations, Error, Result};

/// A uniformly sampled series. Power series are in kW, energies in kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub start: NaiveDateTime,
    pub step_hours: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start: NaiveDateTime, step_hours: f64, values: Vec<f64>) -> Result<Self> {
        let ts = TimeSeries {
            start,
            step_hours,
            values,
        };
        if let Some(v) = ts.structural_problem() {
            return Err(Error::domain(v));
        }
        Ok(ts)
    }

    /// Hourly series starting at `start`.
    pub fn hourly(start: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        Self::new(start, 1.0, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        let secs = (self.step_hours * 3600.0 * i as f64).round() as i64;
        self.start + Duration::seconds(secs)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = NaiveDateTime> + '_ {
        (0..self.len()).map(|i| self.timestamp(i))
    }

    /// Span covered by the samples, in hours.
    pub fn span_hours(&self) -> f64 {
        self.step_hours * self.len() as f64
    }

    /// Sum of `value * step`, i.e. energy for a power series.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step_hours
    }

    /// Whether two series share start, step and length.
    pub fn aligned_with(&self, other: &TimeSeries) -> bool {
        self.start == other.start
            && self.step_hours == other.step_hours
            && self.len() == other.len()
    }

    fn structural_problem(&self) -> Option<String> {
        if !(self.step_hours.is_finite() && self.step_hours > 0.0) {
            return Some(format!("step must be positive, got {}", self.step_hours));
        }
        if self.values.is_empty() {
            return Some("series is empty".into());
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Some(format!("non-finite sample at index {i}"));
        }
        None
    }

    fn first_negative(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .find(|(_, v)| *v < 0.0)
    }
}

/// Photovoltaic panel model parameters, identical for every participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvSpec {
    pub rated_kw: f64,
    pub panel_area_m2: f64,
    pub lifespan_years: u32,
    /// Power temperature coefficient in %/°C.
    pub gamma_pct_per_c: f64,
    pub cost_eur_per_kw: f64,
    pub stc_irradiance_kw_m2: f64,
    pub stc_temp_c: f64,
    pub noct_c: f64,
    pub opex_eur_per_kw_year: f64,
    pub ca_eur_per_kw_year: f64,
}

impl Default for PvSpec {
    fn default() -> Self {
        PvSpec {
            rated_kw: 0.43,
            panel_area_m2: 2.4,
            lifespan_years: 25,
            gamma_pct_per_c: 0.043,
            cost_eur_per_kw: 1200.0,
            stc_irradiance_kw_m2: 1.0,
            stc_temp_c: 25.0,
            noct_c: 45.0,
            opex_eur_per_kw_year: 24.0,
            ca_eur_per_kw_year: 1.0,
        }
    }
}

impl PvSpec {
    /// Purchase cost of one panel.
    pub fn panel_cost_eur(&self) -> f64 {
        self.cost_eur_per_kw * self.rated_kw
    }

    /// Yearly O&M plus contract cost of one panel.
    pub fn panel_omca_eur_per_year(&self) -> f64 {
        self.rated_kw * (self.opex_eur_per_kw_year + self.ca_eur_per_kw_year)
    }
}

/// Battery unit parameters, identical for every participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BessSpec {
    pub capacity_kwh: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub p_charge_max_kw: f64,
    pub p_discharge_max_kw: f64,
    pub soc_min_kwh: f64,
    pub soc_max_kwh: f64,
    pub cost_eur_per_kwh: f64,
    pub lifespan_years: u32,
    pub opex_eur_per_kwh_year: f64,
    pub ca_eur_per_kwh_year: f64,
    pub max_units: u32,
}

impl Default for BessSpec {
    fn default() -> Self {
        BessSpec {
            capacity_kwh: 5.0,
            eta_charge: 0.9,
            eta_discharge: 0.9,
            p_charge_max_kw: 1.25,
            p_discharge_max_kw: 1.25,
            soc_min_kwh: 0.5,
            soc_max_kwh: 4.5,
            cost_eur_per_kwh: 250.0,
            lifespan_years: 12,
            opex_eur_per_kwh_year: 24.0,
            ca_eur_per_kwh_year: 1.0,
            max_units: 20,
        }
    }
}

impl BessSpec {
    pub fn unit_cost_eur(&self) -> f64 {
        self.cost_eur_per_kwh * self.capacity_kwh
    }

    pub fn unit_omca_eur_per_year(&self) -> f64 {
        self.capacity_kwh * (self.opex_eur_per_kwh_year + self.ca_eur_per_kwh_year)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantSpec {
    pub id: String,
    pub roof_area_m2: f64,
    pub demand: TimeSeries,
    /// Yearly bill before joining the community.
    pub annual_bill_eur: f64,
}

/// One €/kWh rate per time-of-use band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandRates {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TariffSchedule {
    pub buy_eur_per_kwh: BandRates,
    pub sell_eur_per_kwh: BandRates,
    pub share_eur_per_kwh: f64,
    pub transmission_eur_per_kwh: f64,
    /// Dates billed entirely in the off-peak band, on top of Sundays.
    #[serde(default)]
    pub holidays: Vec<NaiveDate>,
}

impl Default for TariffSchedule {
    fn default() -> Self {
        TariffSchedule {
            buy_eur_per_kwh: BandRates {
                f1: 0.195,
                f2: 0.165,
                f3: 0.125,
            },
            sell_eur_per_kwh: BandRates {
                f1: 0.075,
                f2: 0.055,
                f3: 0.035,
            },
            share_eur_per_kwh: 0.11,
            transmission_eur_per_kwh: 0.00822,
            holidays: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicParams {
    pub discount_rate: f64,
    #[serde(default = "default_horizon_years")]
    pub horizon_years: u32,
    #[serde(default = "default_season_days")]
    pub season_days: f64,
    #[serde(default)]
    pub max_payback_years: Option<u32>,
    /// Start operating cash flows at year 1 instead of year 0.
    #[serde(default)]
    pub operating_from_year_one: bool,
}

fn default_season_days() -> f64 {
    91.0
}

fn default_horizon_years() -> u32 {
    25
}

impl Default for EconomicParams {
    fn default() -> Self {
        EconomicParams {
            discount_rate: 0.03,
            horizon_years: default_horizon_years(),
            season_days: default_season_days(),
            max_payback_years: None,
            operating_from_year_one: false,
        }
    }
}

impl EconomicParams {
    /// First year carrying operating cash flows.
    pub fn first_operating_year(&self) -> u32 {
        u32::from(self.operating_from_year_one)
    }

    pub fn discount(&self, year: u32) -> f64 {
        (1.0 + self.discount_rate).powi(year as i32).recip()
    }

    /// Σ (1+r)^-y over the operating years up to `through` inclusive.
    pub fn operating_annuity(&self, through: u32) -> f64 {
        (self.first_operating_year()..=through)
            .map(|y| self.discount(y))
            .sum()
    }
}

/// Irradiance (kW/m²) and ambient temperature (°C) on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Weather {
    pub irradiance: TimeSeries,
    pub ambient: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecConfig {
    pub participants: Vec<ParticipantSpec>,
    pub pv: PvSpec,
    pub bess: BessSpec,
    pub tariff: TariffSchedule,
    pub economics: EconomicParams,
    pub weather: Weather,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    SingleParticipantRec {
        count: usize,
    },
    DuplicateParticipant {
        id: String,
    },
    EmptyParticipantId,
    NonPositiveParameter {
        field: String,
        value: f64,
    },
    NegativeValue {
        field: String,
        value: f64,
    },
    SocEfficiencyInvalid {
        field: String,
        value: f64,
    },
    SocBoundsInverted {
        soc_min: f64,
        soc_max: f64,
        capacity: f64,
    },
    NegativeRate {
        field: String,
        value: f64,
    },
    BuyBelowSell {
        band: &'static str,
        buy: f64,
        sell: f64,
    },
    InvalidSeries {
        series: String,
        reason: String,
    },
    SeriesLengthMismatch {
        series: String,
        expected: String,
        found: String,
    },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConfigViolation::*;
        match self {
            SingleParticipantRec { count } => {
                write!(f, "a community needs at least two participants, got {count}")
            }
            DuplicateParticipant { id } => write!(f, "duplicate participant id '{id}'"),
            EmptyParticipantId => write!(f, "participant id must not be empty"),
            NonPositiveParameter { field, value } => {
                write!(f, "{field} must be positive, got {value}")
            }
            NegativeValue { field, value } => {
                write!(f, "{field} must be nonnegative, got {value}")
            }
            SocEfficiencyInvalid { field, value } => {
                write!(f, "{field} must lie in (0, 1], got {value}")
            }
            SocBoundsInverted {
                soc_min,
                soc_max,
                capacity,
            } => write!(
                f,
                "state-of-charge bounds must satisfy 0 <= min < max <= capacity, got {soc_min} / {soc_max} / {capacity}"
            ),
            NegativeRate { field, value } => write!(f, "rate {field} is negative: {value}"),
            BuyBelowSell { band, buy, sell } => {
                write!(f, "band {band}: buy rate {buy} is below sell rate {sell}")
            }
            InvalidSeries { series, reason } => write!(f, "series {series}: {reason}"),
            SeriesLengthMismatch {
                series,
                expected,
                found,
            } => write!(
                f,
                "series {series} is not aligned with the weather grid (expected {expected}, found {found})"
            ),
        }
    }
}

/// Checks every invariant of `raw` and returns it unchanged when all hold.
/// On failure the error lists every violation found.
pub fn validate_config(raw: RecConfig) -> Result<RecConfig> {
    let violations = collect_violations(&raw);
    if violations.is_empty() {
        Ok(raw)
    } else {
        Err(Error::Config(ConfigViolations(violations)))
    }
}

pub fn collect_violations(c: &RecConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();

    if c.participants.len() < 2 {
        out.push(ConfigViolation::SingleParticipantRec {
            count: c.participants.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for p in &c.participants {
        if p.id.trim().is_empty() {
            out.push(ConfigViolation::EmptyParticipantId);
        } else if !seen.insert(p.id.as_str()) {
            out.push(ConfigViolation::DuplicateParticipant { id: p.id.clone() });
        }
        nonneg(
            &mut out,
            &format!("participants.{}.roof_area_m2", p.id),
            p.roof_area_m2,
        );
        nonneg(
            &mut out,
            &format!("participants.{}.annual_bill_eur", p.id),
            p.annual_bill_eur,
        );
        series_checks(&mut out, &format!("demand[{}]", p.id), &p.demand, true);
        if !p.demand.aligned_with(&c.weather.irradiance) {
            out.push(mismatch(
                &format!("demand[{}]", p.id),
                &c.weather.irradiance,
                &p.demand,
            ));
        }
    }

    series_checks(&mut out, "weather.irradiance", &c.weather.irradiance, true);
    series_checks(&mut out, "weather.ambient", &c.weather.ambient, false);
    if !c.weather.ambient.aligned_with(&c.weather.irradiance) {
        out.push(mismatch(
            "weather.ambient",
            &c.weather.irradiance,
            &c.weather.ambient,
        ));
    }

    let pv = &c.pv;
    for (field, v) in [
        ("pv.rated_kw", pv.rated_kw),
        ("pv.panel_area_m2", pv.panel_area_m2),
        ("pv.gamma_pct_per_c", pv.gamma_pct_per_c),
        ("pv.cost_eur_per_kw", pv.cost_eur_per_kw),
        ("pv.stc_irradiance_kw_m2", pv.stc_irradiance_kw_m2),
        ("pv.stc_temp_c", pv.stc_temp_c),
        ("pv.noct_c", pv.noct_c),
        ("pv.opex_eur_per_kw_year", pv.opex_eur_per_kw_year),
        ("pv.ca_eur_per_kw_year", pv.ca_eur_per_kw_year),
        ("pv.lifespan_years", f64::from(pv.lifespan_years)),
    ] {
        positive(&mut out, field, v);
    }

    let b = &c.bess;
    for (field, v) in [
        ("bess.eta_charge", b.eta_charge),
        ("bess.eta_discharge", b.eta_discharge),
    ] {
        if !(v > 0.0 && v <= 1.0) {
            out.push(ConfigViolation::SocEfficiencyInvalid {
                field: field.into(),
                value: v,
            });
        }
    }
    for (field, v) in [
        ("bess.capacity_kwh", b.capacity_kwh),
        ("bess.p_charge_max_kw", b.p_charge_max_kw),
        ("bess.p_discharge_max_kw", b.p_discharge_max_kw),
        ("bess.lifespan_years", f64::from(b.lifespan_years)),
    ] {
        positive(&mut out, field, v);
    }
    for (field, v) in [
        ("bess.cost_eur_per_kwh", b.cost_eur_per_kwh),
        ("bess.opex_eur_per_kwh_year", b.opex_eur_per_kwh_year),
        ("bess.ca_eur_per_kwh_year", b.ca_eur_per_kwh_year),
    ] {
        nonneg(&mut out, field, v);
    }
    let soc_ok = b.soc_min_kwh.is_finite()
        && b.soc_max_kwh.is_finite()
        && 0.0 <= b.soc_min_kwh
        && b.soc_min_kwh < b.soc_max_kwh
        && b.soc_max_kwh <= b.capacity_kwh;
    if !soc_ok {
        out.push(ConfigViolation::SocBoundsInverted {
            soc_min: b.soc_min_kwh,
            soc_max: b.soc_max_kwh,
            capacity: b.capacity_kwh,
        });
    }

    let t = &c.tariff;
    for (band, buy, sell) in [
        ("F1", t.buy_eur_per_kwh.f1, t.sell_eur_per_kwh.f1),
        ("F2", t.buy_eur_per_kwh.f2, t.sell_eur_per_kwh.f2),
        ("F3", t.buy_eur_per_kwh.f3, t.sell_eur_per_kwh.f3),
    ] {
        rate(&mut out, &format!("tariff.buy.{band}"), buy);
        rate(&mut out, &format!("tariff.sell.{band}"), sell);
        if buy < sell {
            out.push(ConfigViolation::BuyBelowSell { band, buy, sell });
        }
    }
    rate(&mut out, "tariff.share_eur_per_kwh", t.share_eur_per_kwh);
    rate(
        &mut out,
        "tariff.transmission_eur_per_kwh",
        t.transmission_eur_per_kwh,
    );

    let e = &c.economics;
    nonneg(&mut out, "economics.discount_rate", e.discount_rate);
    positive(
        &mut out,
        "economics.horizon_years",
        f64::from(e.horizon_years),
    );
    if !(e.season_days.is_finite() && e.season_days >= 1.0) {
        out.push(ConfigViolation::NonPositiveParameter {
            field: "economics.season_days".into(),
            value: e.season_days,
        });
    }
    if let Some(pb) = e.max_payback_years {
        if pb > e.horizon_years {
            out.push(ConfigViolation::NonPositiveParameter {
                field: "economics.max_payback_years (exceeds horizon)".into(),
                value: f64::from(pb),
            });
        }
    }

    out
}

fn positive(out: &mut Vec<ConfigViolation>, field: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(ConfigViolation::NonPositiveParameter {
            field: field.into(),
            value: v,
        });
    }
}

fn nonneg(out: &mut Vec<ConfigViolation>, field: &str, v: f64) {
    if !(v.is_finite() && v >= 0.0) {
        out.push(ConfigViolation::NegativeValue {
            field: field.into(),
            value: v,
        });
    }
}

fn rate(out: &mut Vec<ConfigViolation>, field: &str, v: f64) {
    if !(v.is_finite() && v >= 0.0) {
        out.push(ConfigViolation::NegativeRate {
            field: field.into(),
            value: v,
        });
    }
}

fn series_checks(out: &mut Vec<ConfigViolation>, name: &str, s: &TimeSeries, nonnegative: bool) {
    if let Some(reason) = s.structural_problem() {
        out.push(ConfigViolation::InvalidSeries {
            series: name.into(),
            reason,
        });
    } else if nonnegative {
        if let Some((i, v)) = s.first_negative() {
            out.push(ConfigViolation::InvalidSeries {
                series: name.into(),
                reason: format!("negative sample {v} at index {i}"),
            });
        }
    }
}

fn mismatch(name: &str, reference: &TimeSeries, s: &TimeSeries) -> ConfigViolation {
    let describe =
        |t: &TimeSeries| format!("start {} step {}h len {}", t.start, t.step_hours, t.len());
    ConfigViolation::SeriesLengthMismatch {
        series: name.into(),
        expected: describe(reference),
        found: describe(s),
    }
}
