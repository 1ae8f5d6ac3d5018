//! Panel and fleet photovoltaic generation, roof-area limits and PV costs.

use crate::error::{Error, Result};
use crate::types::{PvSpec, TimeSeries, Weather};

/// Capital and yearly running cost of a participant's panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvFleetCosts {
    pub capex_eur: f64,
    pub omca_eur_per_year: f64,
}

/// Cell temperature from the NOCT linear model.
pub fn cell_temperature(irradiance: f64, ambient_c: f64, spec: &PvSpec) -> Result<f64> {
    if irradiance < 0.0 || !irradiance.is_finite() {
        return Err(Error::domain(format!(
            "irradiance must be >= 0, got {irradiance}"
        )));
    }
    Ok(ambient_c + irradiance / spec.stc_irradiance_kw_m2 * (spec.noct_c - spec.stc_temp_c))
}

/// Output of a single panel in kW. Never negative.
pub fn panel_power(irradiance: f64, cell_temp_c: f64, spec: &PvSpec) -> Result<f64> {
    if irradiance < 0.0 || !irradiance.is_finite() {
        return Err(Error::domain(format!(
            "irradiance must be >= 0, got {irradiance}"
        )));
    }
    let derate = 1.0 - spec.gamma_pct_per_c / 100.0 * (cell_temp_c - spec.stc_temp_c);
    Ok((spec.rated_kw * irradiance / spec.stc_irradiance_kw_m2 * derate).max(0.0))
}

/// Single-panel output for one irradiance/ambient sample.
pub fn panel_output(irradiance: f64, ambient_c: f64, spec: &PvSpec) -> Result<f64> {
    let cell = cell_temperature(irradiance, ambient_c, spec)?;
    panel_power(irradiance, cell, spec)
}

/// Per-panel output over a pair of irradiance/ambient profiles.
pub fn panel_profile(irradiance: &[f64], ambient_c: &[f64], spec: &PvSpec) -> Result<Vec<f64>> {
    if irradiance.len() != ambient_c.len() {
        return Err(Error::SeriesLengthMismatch {
            what: "irradiance vs ambient".into(),
            left: irradiance.len(),
            right: ambient_c.len(),
        });
    }
    irradiance
        .iter()
        .zip(ambient_c)
        .map(|(&e, &a)| panel_output(e, a, spec))
        .collect()
}

/// Generation of `n_panels` identical panels.
pub fn fleet_generation(weather: &Weather, n_panels: u32, spec: &PvSpec) -> Result<TimeSeries> {
    if !weather.irradiance.aligned_with(&weather.ambient) {
        return Err(Error::SeriesLengthMismatch {
            what: "irradiance vs ambient".into(),
            left: weather.irradiance.len(),
            right: weather.ambient.len(),
        });
    }
    let single = panel_profile(&weather.irradiance.values, &weather.ambient.values, spec)?;
    let n = f64::from(n_panels);
    TimeSeries::new(
        weather.irradiance.start,
        weather.irradiance.step_hours,
        single.into_iter().map(|p| n * p).collect(),
    )
}

/// Panels that fit on `roof_area_m2`.
pub fn max_panels(roof_area_m2: f64, spec: &PvSpec) -> u32 {
    if !(roof_area_m2 > 0.0) {
        return 0;
    }
    let n = (roof_area_m2 / spec.panel_area_m2).floor();
    // a ratio like 7.2/2.4 can land just under an integer
    let n = if (n + 1.0) * spec.panel_area_m2 <= roof_area_m2 {
        n + 1.0
    } else {
        n
    };
    n.min(f64::from(u32::MAX)) as u32
}

pub fn pv_costs(n_panels: u32, spec: &PvSpec) -> PvFleetCosts {
    let n = f64::from(n_panels);
    PvFleetCosts {
        capex_eur: n * spec.panel_cost_eur(),
        omca_eur_per_year: n * spec.panel_omca_eur_per_year(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn spec() -> PvSpec {
        PvSpec::default()
    }

    #[test]
    fn cell_temperature_examples() {
        let s = spec();
        assert_eq!(cell_temperature(0.0, 10.0, &s).unwrap(), 10.0);
        assert!((cell_temperature(1.0, 20.0, &s).unwrap() - 40.0).abs() < 1e-12);
        assert!((cell_temperature(0.8, 20.0, &s).unwrap() - 36.0).abs() < 1e-12);
        assert!(cell_temperature(-0.1, 20.0, &s).is_err());
    }

    #[test]
    fn panel_power_examples() {
        let s = spec();
        assert!((panel_power(1.0, 25.0, &s).unwrap() - 0.43).abs() < 1e-12);
        assert_eq!(panel_power(0.0, 60.0, &s).unwrap(), 0.0);
        let p = panel_power(0.8, 36.0, &s).unwrap();
        assert!((p - 0.342_372_88).abs() < 1e-8, "{p}");
    }

    #[test]
    fn extreme_heat_is_clamped() {
        let s = PvSpec {
            gamma_pct_per_c: 5.0,
            ..spec()
        };
        assert_eq!(panel_power(1.0, 100.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn max_panels_examples() {
        let s = spec();
        assert_eq!(max_panels(0.0, &s), 0);
        assert_eq!(max_panels(2.4, &s), 1);
        assert_eq!(max_panels(50.0, &s), 20);
        assert_eq!(max_panels(7.2, &s), 3);
    }

    #[test]
    fn cost_examples() {
        let s = spec();
        assert_eq!(
            pv_costs(0, &s),
            PvFleetCosts {
                capex_eur: 0.0,
                omca_eur_per_year: 0.0
            }
        );
        let one = pv_costs(1, &s);
        assert!((one.capex_eur - 516.0).abs() < 1e-9);
        assert!((one.omca_eur_per_year - 10.75).abs() < 1e-9);
        assert!((pv_costs(146, &s).capex_eur - 75_336.0).abs() < 1e-6);
    }

    fn weather(e: Vec<f64>) -> Weather {
        let t0 = NaiveDate::from_ymd_opt(2023, 6, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let amb = vec![18.0; e.len()];
        Weather {
            irradiance: TimeSeries::hourly(t0, e).unwrap(),
            ambient: TimeSeries::hourly(t0, amb).unwrap(),
        }
    }

    #[test]
    fn fleet_scaling() {
        let w = weather(vec![0.0, 0.2, 0.7, 0.9, 0.1]);
        let s = spec();
        let zero = fleet_generation(&w, 0, &s).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let one = fleet_generation(&w, 1, &s).unwrap();
        let single = panel_profile(&w.irradiance.values, &w.ambient.values, &s).unwrap();
        assert_eq!(one.values, single);
        let many = fleet_generation(&w, 146, &s).unwrap();
        for (m, o) in many.values.iter().zip(&one.values) {
            assert!((m - 146.0 * o).abs() < 1e-12);
        }
    }

    #[test]
    fn misaligned_weather() {
        let mut w = weather(vec![0.1, 0.2]);
        w.ambient.values.push(3.0);
        assert!(matches!(
            fleet_generation(&w, 2, &spec()),
            Err(Error::SeriesLengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn fleet_is_linear_in_panel_count(
            e in prop::collection::vec(0.0f64..1.2, 1..24),
            a in 0u32..200,
            b in 0u32..200,
        ) {
            let w = weather(e);
            let s = spec();
            let ab = fleet_generation(&w, a + b, &s).unwrap();
            let fa = fleet_generation(&w, a, &s).unwrap();
            let fb = fleet_generation(&w, b, &s).unwrap();
            for i in 0..ab.len() {
                let sum = fa.values[i] + fb.values[i];
                prop_assert!((ab.values[i] - sum).abs() <= 1e-9 * (1.0 + sum.abs()));
            }
        }

        #[test]
        fn max_panels_monotone_and_fits(a in 0.0f64..500.0, extra in 0.0f64..50.0) {
            let s = spec();
            let n = max_panels(a, &s);
            prop_assert!(f64::from(n) * s.panel_area_m2 <= a + 1e-9);
            prop_assert!(max_panels(a + extra, &s) >= n);
        }

        #[test]
        fn panel_power_range(e in 0.0f64..1.5, theta in -40.0f64..90.0) {
            let s = spec();
            let p = panel_power(e, theta, &s).unwrap();
            let cap = s.rated_kw * e / s.stc_irradiance_kw_m2 * (1.0 + s.gamma_pct_per_c.abs());
            prop_assert!(p >= 0.0 && p <= cap + 1e-12);
        }
    }
}
