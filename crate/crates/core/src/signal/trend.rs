use crate::error::{Error, Result};
use crate::types::TimeSeries;

/// Trend window in days.
pub const TREND_WINDOW_DAYS: f64 = 731.0;
/// Default floor applied to load samples before the log.
pub const DEFAULT_LOAD_FLOOR: f64 = 1e-3;

/// Centered moving average of half-width `half` samples. Near the edges the
/// window is clipped to the samples that exist.
pub fn centered_moving_average(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Log-transformed load minus its lowpass trend, and the trend itself.
pub fn log_detrend(load: &TimeSeries, floor: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::domain(format!(
            "load floor must be positive, got {floor}"
        )));
    }
    let logs: Vec<f64> = load.values.iter().map(|&v| v.max(floor).ln()).collect();
    let half = ((TREND_WINDOW_DAYS - 1.0) / 2.0 * 24.0 / load.step_hours).round() as usize;
    let trend = centered_moving_average(&logs, half);
    let y = logs.iter().zip(&trend).map(|(l, t)| l - t).collect();
    Ok((y, trend))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(values: Vec<f64>) -> TimeSeries {
        let start = NaiveDate::from_ymd_opt(2023, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        TimeSeries::hourly(start, values).unwrap()
    }

    #[test]
    fn constant_load_has_flat_trend() {
        let (y, trend) = log_detrend(&series(vec![2.5; 1000]), DEFAULT_LOAD_FLOOR).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert!(trend.iter().all(|t| (t - 2.5f64.ln()).abs() < 1e-12));
    }

    #[test]
    fn exponential_ramp_is_recovered() {
        let n = 60_000;
        let half = 365 * 24;
        let load: Vec<f64> = (0..n).map(|t| (0.001 * t as f64).exp()).collect();
        let (_, trend) = log_detrend(&series(load), DEFAULT_LOAD_FLOOR).unwrap();
        for t in (half..n - half).step_by(97) {
            let truth = 0.001 * t as f64;
            assert!((trend[t] - truth).abs() <= 0.05 * truth, "t={t}");
        }
    }

    #[test]
    fn daily_sinusoid_stays_in_residual() {
        let n = 24 * 365;
        let s: Vec<f64> = (0..n)
            .map(|t| 0.3 * (std::f64::consts::TAU * t as f64 / 24.0).sin())
            .collect();
        let load = s.iter().map(|v| (1.0 + v).exp()).collect();
        let (y, trend) = log_detrend(&series(load), DEFAULT_LOAD_FLOOR).unwrap();
        for t in 0..n {
            assert!((trend[t] - 1.0).abs() < 1e-3, "t={t} trend={}", trend[t]);
            assert!((y[t] - s[t]).abs() < 1e-3);
        }
    }

    #[test]
    fn zeros_are_floored() {
        let (y, trend) = log_detrend(&series(vec![0.0, -1.0, 0.0]), 1e-3).unwrap();
        assert!(y.iter().chain(&trend).all(|v| v.is_finite()));
        assert!(log_detrend(&series(vec![1.0]), 0.0).is_err());
    }

    #[test]
    fn edge_windows_are_clipped() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let m = centered_moving_average(&x, 2);
        assert_eq!(m[0], 2.0);
        assert_eq!(m[1], 2.5);
        assert_eq!(m[3], 4.0);
        assert_eq!(m[6], 6.0);
    }

    #[test]
    fn one_year_has_constant_trend() {
        let load: Vec<f64> = (0..8760)
            .map(|t| 1.0 + 0.5 * (t as f64 / 900.0).sin().abs())
            .collect();
        let (_, trend) = log_detrend(&series(load), DEFAULT_LOAD_FLOOR).unwrap();
        assert!(trend.iter().all(|t| (t - trend[0]).abs() < 1e-12));
    }
}
