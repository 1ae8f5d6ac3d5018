//! Representative seasonal days from a year of hourly data.
//!
//! Loads go through a log transform, a moving-average detrend and a
//! LASSO-penalized Fourier regression on yearly × weekly harmonics (plus an
//! optional daily set), fitted with FISTA. Weather is reduced to seasonal
//! hour-of-day means.

mod extract;
mod lasso;
mod regressors;
mod repdays;
mod trend;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use extract::{
    cross_validate_lambda, extract_rep_days, extract_with_models, fit_seasonal_model,
    representative_days, weather_rep_days, ExtractOptions, LambdaChoice, SeasonalModel,
    MIN_SPAN_HOURS,
};
pub use lasso::{
    fista, lambda_max, lasso_objective, power_iteration, soft_threshold, FistaOptions, FistaOrder,
    FistaResult,
};
pub use regressors::{build_regressors, Design, RegressorSpec};
pub use repdays::{representative_dates, RepresentativeDays, Season};
pub use trend::{centered_moving_average, log_detrend, DEFAULT_LOAD_FLOOR, TREND_WINDOW_DAYS};

/// Representative days for a whole community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepDaySet {
    pub dates: [NaiveDate; 4],
    /// Participant id and demand profile, in configuration order.
    pub demand: Vec<(String, RepresentativeDays)>,
    pub irradiance: RepresentativeDays,
    pub ambient: RepresentativeDays,
}

impl RepDaySet {
    pub fn demand_of(&self, id: &str) -> Option<&RepresentativeDays> {
        self.demand
            .iter()
            .find(|(pid, _)| pid == id)
            .map(|(_, d)| d)
    }

    /// Checks profile lengths and finiteness, e.g. after deserializing.
    pub fn validate(&self) -> crate::Result<()> {
        let all = self
            .demand
            .iter()
            .map(|(_, d)| d)
            .chain([&self.irradiance, &self.ambient]);
        for days in all {
            RepresentativeDays::new(days.dates, days.profiles.clone())?;
            if days.dates != self.dates {
                return Err(crate::Error::Structure(
                    "representative dates differ between series".into(),
                ));
            }
        }
        Ok(())
    }
}
