use chrono::{NaiveDate, NaiveDateTime, Timelike};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{TimeSeries, Weather};

use super::lasso::{fista, lambda_max, FistaOptions};
use super::regressors::{build_regressors, Design, RegressorSpec};
use super::repdays::{representative_dates, RepresentativeDays, Season};
use super::trend::{log_detrend, DEFAULT_LOAD_FLOOR};
use super::RepDaySet;

/// Minimum span of input data, hours.
pub const MIN_SPAN_HOURS: f64 = 8760.0;

/// How the LASSO weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaChoice {
    /// This fraction of `lambda_max`.
    Relative(f64),
    Fixed(f64),
    /// Blocked k-fold cross-validation over a log grid below `lambda_max`.
    CrossValidated {
        folds: usize,
        grid: usize,
    },
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Relative(0.1)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub regressors: RegressorSpec,
    pub lambda: LambdaChoice,
    pub fista: FistaOptions,
    /// Floor applied to loads before the log; defaults to 1e-3.
    pub floor: Option<f64>,
}

/// A fitted log-load model `exp(T̄ + Φ(t) θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub theta: Vec<f64>,
    pub regressors: RegressorSpec,
    pub trend_level: f64,
    pub lambda: f64,
    /// Instant at which regressor time is zero.
    pub origin: NaiveDateTime,
    pub converged: bool,
    pub iterations: usize,
}

impl SeasonalModel {
    /// The model at `at`, in load units.
    pub fn evaluate(&self, at: NaiveDateTime) -> f64 {
        let t = (at - self.origin).num_seconds() as f64 / 3600.0;
        let mut row = Vec::with_capacity(self.theta.len());
        self.regressors.row(t, &mut row);
        let f: f64 = row.iter().zip(&self.theta).map(|(a, b)| a * b).sum();
        (self.trend_level + f).exp()
    }
}

fn require_year(series: &TimeSeries, what: &str) -> Result<()> {
    if series.span_hours() < MIN_SPAN_HOURS {
        return Err(Error::InsufficientData(format!(
            "{what} spans {} h, at least {MIN_SPAN_HOURS} h are needed",
            series.span_hours()
        )));
    }
    Ok(())
}

/// Blocked cross-validation: contiguous folds, log grid from `lambda_max`
/// down to `1e-3 · lambda_max`. Ties go to the larger weight.
pub fn cross_validate_lambda(
    phi: &Design,
    y: &[f64],
    folds: usize,
    grid: usize,
    opts: &FistaOptions,
) -> Result<f64> {
    let top = lambda_max(phi, y)?;
    if folds < 2 || grid == 0 || phi.rows < folds {
        return Err(Error::domain(format!(
            "cross-validation needs at least 2 folds, 1 grid point and one row per fold (folds {folds}, grid {grid}, rows {})",
            phi.rows
        )));
    }
    if top == 0.0 {
        return Ok(0.0);
    }
    let n = phi.rows;
    let mut best = (f64::INFINITY, top);
    for g in 0..grid {
        let frac = if grid == 1 {
            1.0
        } else {
            g as f64 / (grid - 1) as f64
        };
        let lambda = top * 10f64.powf(-3.0 * frac);
        let mut err = 0.0;
        for f in 0..folds {
            let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
            let train = phi.select_rows((0..n).filter(|&i| i < lo || i >= hi));
            let y_train: Vec<f64> = (0..n)
                .filter(|&i| i < lo || i >= hi)
                .map(|i| y[i])
                .collect();
            let theta = fista(&train, &y_train, lambda, opts)?.theta;
            let test = phi.select_rows(lo..hi);
            let fit = test.mul(&theta);
            err += fit
                .iter()
                .zip(&y[lo..hi])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        debug!("cv lambda={lambda:.3e} sse={err:.6e}");
        if err < best.0 {
            best = (err, lambda);
        }
    }
    Ok(best.1)
}

/// Fits the seasonal log-load model of one series.
pub fn fit_seasonal_model(load: &TimeSeries, opts: &ExtractOptions) -> Result<SeasonalModel> {
    require_year(load, "load")?;
    let (y, trend) = log_detrend(load, opts.floor.unwrap_or(DEFAULT_LOAD_FLOOR))?;
    let phi = build_regressors(load.len(), load.step_hours, &opts.regressors)?;
    let lambda = match opts.lambda {
        LambdaChoice::Relative(f) if f.is_finite() && f >= 0.0 => f * lambda_max(&phi, &y)?,
        LambdaChoice::Fixed(l) if l.is_finite() && l >= 0.0 => l,
        LambdaChoice::CrossValidated { folds, grid } => {
            cross_validate_lambda(&phi, &y, folds, grid, &opts.fista)?
        }
        other => return Err(Error::domain(format!("invalid lambda choice {other:?}"))),
    };
    let fit = fista(&phi, &y, lambda, &opts.fista)?;
    if !fit.converged {
        warn!(
            "FISTA stopped after {} iterations without converging",
            fit.iterations
        );
    }
    Ok(SeasonalModel {
        theta: fit.theta,
        regressors: opts.regressors,
        trend_level: trend.iter().sum::<f64>() / trend.len() as f64,
        lambda,
        origin: load.start,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

/// The model on each date, hour by hour from midnight.
pub fn representative_days(
    model: &SeasonalModel,
    dates: [NaiveDate; 4],
) -> Result<RepresentativeDays> {
    let profiles = dates.map(|d| {
        (0..RepresentativeDays::HOURS as u32)
            .map(|h| model.evaluate(d.and_hms_opt(h, 0, 0).expect("valid hour")))
            .collect()
    });
    RepresentativeDays::new(dates, profiles)
}

/// Seasonal hour-of-day means of irradiance and ambient temperature.
pub fn weather_rep_days(weather: &Weather) -> Result<(RepresentativeDays, RepresentativeDays)> {
    require_year(&weather.irradiance, "weather")?;
    if !weather.irradiance.aligned_with(&weather.ambient) {
        return Err(Error::SeriesLengthMismatch {
            what: "irradiance vs ambient".into(),
            left: weather.irradiance.len(),
            right: weather.ambient.len(),
        });
    }
    let dates = representative_dates(weather.irradiance.start, weather.irradiance.span_hours());
    let mut sums = [[[0.0; 24]; 4]; 2];
    let mut counts = [[0usize; 24]; 4];
    for (i, ts) in weather.irradiance.timestamps().enumerate() {
        let s = Season::of_month(chrono::Datelike::month(&ts)).index();
        let h = ts.hour() as usize;
        sums[0][s][h] += weather.irradiance.values[i];
        sums[1][s][h] += weather.ambient.values[i];
        counts[s][h] += 1;
    }
    let mut out = Vec::with_capacity(2);
    for quantity in &sums {
        let mut profiles: [Vec<f64>; 4] = Default::default();
        for s in 0..4 {
            for h in 0..24 {
                if counts[s][h] == 0 {
                    return Err(Error::InsufficientData(format!(
                        "no weather samples for {} at hour {h}",
                        Season::ALL[s]
                    )));
                }
                profiles[s].push(quantity[s][h] / counts[s][h] as f64);
            }
        }
        out.push(RepresentativeDays::new(dates, profiles)?);
    }
    let ambient = out.pop().expect("two quantities");
    let irradiance = out.pop().expect("two quantities");
    Ok((irradiance, ambient))
}

/// Representative days of every participant and of the weather. Loads are
/// fitted in parallel; dates follow the weather series.
pub fn extract_rep_days(
    demands: &[(String, TimeSeries)],
    weather: &Weather,
    opts: &ExtractOptions,
) -> Result<RepDaySet> {
    extract_with_models(demands, weather, opts).map(|(set, _)| set)
}

/// As [`extract_rep_days`], also returning each participant's model.
pub fn extract_with_models(
    demands: &[(String, TimeSeries)],
    weather: &Weather,
    opts: &ExtractOptions,
) -> Result<(RepDaySet, Vec<SeasonalModel>)> {
    let (irradiance, ambient) = weather_rep_days(weather)?;
    let dates = irradiance.dates;
    let fitted: Vec<Result<(SeasonalModel, RepresentativeDays)>> = std::thread::scope(|s| {
        let handles: Vec<_> = demands
            .iter()
            .map(|(_, series)| {
                s.spawn(move || {
                    let m = fit_seasonal_model(series, opts)?;
                    let days = representative_days(&m, dates)?;
                    Ok((m, days))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction worker panicked"))
            .collect()
    });
    let mut demand = Vec::with_capacity(demands.len());
    let mut models = Vec::with_capacity(demands.len());
    for ((id, _), r) in demands.iter().zip(fitted) {
        let (m, days) = r?;
        demand.push((id.clone(), days));
        models.push(m);
    }
    let set = RepDaySet {
        dates,
        demand,
        irradiance,
        ambient,
    };
    Ok((set, models))
}
