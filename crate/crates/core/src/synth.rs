//! Seeded synthetic data: household loads, weather and tiny sizing
//! instances for fixtures and tests.

use std::f64::consts::{PI, TAU};

use chrono::{Datelike, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sizing::{SizingParticipant, SizingProblem};
use crate::types::{BessSpec, EconomicParams, PvSpec, TimeSeries, Weather};

/// Log-load `ln base + yearly + weekly + daily harmonics + noise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadShape {
    pub base_kw: f64,
    /// Amplitude of the yearly cosine, peaking in mid-January.
    pub yearly_amp: f64,
    pub weekly_amp: f64,
    /// `(cos, sin)` amplitude of daily harmonics 1, 2, ...
    pub daily: Vec<(f64, f64)>,
    /// Standard deviation of the iid log-noise.
    pub noise_sd: f64,
}

impl LoadShape {
    /// A household-like shape with morning and evening peaks.
    pub fn household(rng: &mut impl Rng) -> Self {
        LoadShape {
            base_kw: rng.gen_range(0.3..0.9),
            yearly_amp: rng.gen_range(0.1..0.3),
            weekly_amp: rng.gen_range(0.02..0.1),
            daily: vec![
                (rng.gen_range(-0.35..-0.2), rng.gen_range(-0.15..0.0)),
                (rng.gen_range(0.05..0.15), rng.gen_range(-0.1..0.1)),
                (rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)),
            ],
            noise_sd: rng.gen_range(0.05..0.15),
        }
    }

    /// Noiseless load at `t` hours after `origin`.
    pub fn noiseless(&self, origin: NaiveDateTime, t: f64) -> f64 {
        let at = origin + chrono::Duration::seconds((t * 3600.0).round() as i64);
        let day = at.ordinal0() as f64 + at.hour() as f64 / 24.0;
        let weekday = at.weekday().num_days_from_monday() as f64 + at.hour() as f64 / 24.0;
        let hour = at.hour() as f64 + at.minute() as f64 / 60.0;
        let mut f = self.yearly_amp * (TAU * (day - 15.0) / 365.0).cos()
            + self.weekly_amp * (TAU * (weekday - 5.5) / 7.0).cos();
        for (k, (a, b)) in self.daily.iter().enumerate() {
            let w = TAU * (k + 1) as f64 * hour / 24.0;
            f += a * w.cos() + b * w.sin();
        }
        self.base_kw * f.exp()
    }

    pub fn sample(
        &self,
        rng: &mut impl Rng,
        start: NaiveDateTime,
        hours: usize,
    ) -> Result<TimeSeries> {
        let values = (0..hours)
            .map(|t| {
                let noise: f64 = standard_normal(rng) * self.noise_sd;
                self.noiseless(start, t as f64) * noise.exp()
            })
            .collect();
        TimeSeries::hourly(start, values)
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// Seasonal position in `[-1, 1]`, 1 at the June solstice.
fn season_phase(at: NaiveDateTime) -> f64 {
    (TAU * (at.ordinal0() as f64 - 171.0) / 365.0).cos()
}

/// Clear-sky irradiance (kW/m²) at `at`.
pub fn clear_sky_irradiance(at: NaiveDateTime) -> f64 {
    let s = season_phase(at);
    let daylight = 12.0 + 3.5 * s;
    let sunrise = 12.5 - daylight / 2.0;
    let x = (at.hour() as f64 + 0.5 - sunrise) / daylight;
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    (0.75 + 0.2 * s) * (PI * x).sin()
}

/// Hourly weather with per-day cloud factors drawn from `[1 − clouds, 1]`.
pub fn synthetic_weather(
    rng: &mut impl Rng,
    start: NaiveDateTime,
    hours: usize,
    clouds: f64,
) -> Result<Weather> {
    let mut irr = Vec::with_capacity(hours);
    let mut amb = Vec::with_capacity(hours);
    let mut factor = 1.0;
    for t in 0..hours {
        let at = start + chrono::Duration::hours(t as i64);
        if t == 0 || at.hour() == 0 {
            factor = 1.0 - clouds * rng.gen::<f64>();
        }
        irr.push(clear_sky_irradiance(at) * factor);
        let daily = 5.0 * (TAU * (at.hour() as f64 - 9.0) / 24.0).sin();
        amb.push(14.0 + 9.0 * season_phase(at) + daily + standard_normal(rng));
    }
    Ok(Weather {
        irradiance: TimeSeries::hourly(start, irr)?,
        ambient: TimeSeries::hourly(start, amb)?,
    })
}

/// Synthetic participants with household loads over a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCommunity {
    pub ids: Vec<String>,
    pub shapes: Vec<LoadShape>,
    pub demands: Vec<TimeSeries>,
    pub roof_areas_m2: Vec<f64>,
    pub weather: Weather,
}

pub fn synthetic_community(
    seed: u64,
    participants: usize,
    start: NaiveDateTime,
    hours: usize,
) -> Result<SyntheticCommunity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weather = synthetic_weather(&mut rng, start, hours, 0.5)?;
    let mut shapes = Vec::with_capacity(participants);
    let mut demands = Vec::with_capacity(participants);
    let mut roofs = Vec::with_capacity(participants);
    for n in 0..participants {
        let shape = LoadShape::household(&mut rng);
        demands.push(shape.sample(&mut rng, start, hours)?);
        shapes.push(shape);
        // the second participant has no usable roof
        roofs.push(if n == 1 {
            0.0
        } else {
            rng.gen_range(10.0..40.0f64).round()
        });
    }
    Ok(SyntheticCommunity {
        ids: (1..=participants).map(|n| format!("p{n}")).collect(),
        shapes,
        demands,
        roof_areas_m2: roofs,
        weather,
    })
}

/// A random single-day instance small enough for exhaustive enumeration:
/// 1–2 participants, 4–8 hours, at most 3 panels and 1 battery each.
pub fn random_tiny_problem(rng: &mut impl Rng) -> SizingProblem {
    let parts = rng.gen_range(1..=2);
    let hours = rng.gen_range(4..=8);
    let sunny = (hours / 2).min(4);
    let first_sunny = rng.gen_range(0..=hours - sunny);
    let pv_per_panel = (0..hours)
        .map(|t| {
            if (first_sunny..first_sunny + sunny).contains(&t) {
                rng.gen_range(0.1..0.43)
            } else {
                0.0
            }
        })
        .collect();
    let mut zeta: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = zeta.iter().sum();
    zeta.iter_mut().for_each(|z| *z /= total);
    SizingProblem {
        dt_hours: 1.0,
        day_len: hours,
        pv_per_panel,
        buy: (0..hours).map(|_| rng.gen_range(0.10..0.30)).collect(),
        sell: (0..hours).map(|_| rng.gen_range(0.02..0.10)).collect(),
        share: (0..hours).map(|_| rng.gen_range(0.05..0.15)).collect(),
        participants: (0..parts)
            .map(|n| SizingParticipant {
                id: format!("p{}", n + 1),
                demand: (0..hours).map(|_| rng.gen_range(0.0..2.0)).collect(),
                max_panels: rng.gen_range(0..=3),
                max_batteries: rng.gen_range(0..=1),
                zeta: zeta[n],
            })
            .collect(),
        pv: PvSpec::default(),
        bess: BessSpec {
            cost_eur_per_kwh: rng.gen_range(0.0..150.0),
            opex_eur_per_kwh_year: rng.gen_range(0.0..5.0),
            ca_eur_per_kwh_year: 0.0,
            ..BessSpec::default()
        },
        economics: EconomicParams {
            season_days: rng.gen_range(200.0..3000.0),
            ..EconomicParams::default()
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2023, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    #[test]
    fn same_seed_same_data() {
        let a = synthetic_community(3, 2, start(), 200).unwrap();
        let b = synthetic_community(3, 2, start(), 200).unwrap();
        assert_eq!(a, b);
        let c = synthetic_community(4, 2, start(), 200).unwrap();
        assert_ne!(a.demands, c.demands);
    }

    #[test]
    fn irradiance_is_zero_at_night_and_bounded() {
        let w = synthetic_weather(&mut ChaCha8Rng::seed_from_u64(1), start(), 8760, 0.3).unwrap();
        for (ts, v) in w.irradiance.timestamps().zip(&w.irradiance.values) {
            assert!((0.0..=0.95).contains(v));
            if ts.hour() < 3 || ts.hour() > 21 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn loads_are_positive() {
        let c = synthetic_community(9, 3, start(), 24 * 30).unwrap();
        assert!(c.demands.iter().flat_map(|d| &d.values).all(|&v| v > 0.0));
        assert_eq!(c.roof_areas_m2[1], 0.0);
    }
}
