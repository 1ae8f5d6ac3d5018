//! Joint PV/battery sizing over periodic representative days.
//!
//! The sizing problem is a mixed-integer linear program: integer panel and
//! battery counts per participant, binary charge/discharge modes per hour,
//! and continuous hourly flows. [`solve_bnb`] solves it by branch-and-bound
//! on the simplex in [`crate::lp`]; [`brute_force_oracle`] enumerates
//! tiny instances exhaustively for verification.

mod bnb;
mod check;
mod model;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::dispatch::DispatchSolution;
use crate::economics::distribution_factors;
use crate::error::{Error, Result};
use crate::pv::{max_panels, panel_profile};
use crate::signal::RepDaySet;
use crate::tariff::HourlyRates;
use crate::types::{BessSpec, EconomicParams, PvSpec, RecConfig};

pub use bnb::{solve_bnb, BnbOptions};
pub use check::{check_solution, recompute_net_profit, SizingViolation};
pub use model::{assemble_milp, MilpModel, VarIndex, TIE_BREAK_PENALTY};
pub use oracle::{brute_force_oracle, brute_force_oracle_with, OracleLimits};

/// One participant as seen by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingParticipant {
    pub id: String,
    /// Demand over the horizon, kW.
    pub demand: Vec<f64>,
    pub max_panels: u32,
    pub max_batteries: u32,
    /// Share of the community incentive.
    pub zeta: f64,
}

/// A fully specified sizing instance over `hours` periodic samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingProblem {
    pub dt_hours: f64,
    /// Samples per periodic day; the horizon is a whole number of days.
    pub day_len: usize,
    /// Output of a single panel at every hour, kW.
    pub pv_per_panel: Vec<f64>,
    pub buy: Vec<f64>,
    pub sell: Vec<f64>,
    /// Incentive plus transmission rate for shared energy.
    pub share: Vec<f64>,
    pub participants: Vec<SizingParticipant>,
    pub pv: PvSpec,
    pub bess: BessSpec,
    pub economics: EconomicParams,
}

impl SizingProblem {
    pub fn hours(&self) -> usize {
        self.pv_per_panel.len()
    }

    pub fn days(&self) -> usize {
        self.hours() / self.day_len
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.hours();
        if t == 0 || self.day_len == 0 || !t.is_multiple_of(self.day_len) {
            return Err(Error::Structure(format!(
                "horizon of {t} samples is not a whole number of {}-sample days",
                self.day_len
            )));
        }
        if self.participants.is_empty() {
            return Err(Error::Structure("no participants".into()));
        }
        for (what, len) in [
            ("buy", self.buy.len()),
            ("sell", self.sell.len()),
            ("share", self.share.len()),
        ] {
            if len != t {
                return Err(Error::SeriesLengthMismatch {
                    what: format!("{what} rates vs horizon"),
                    left: len,
                    right: t,
                });
            }
        }
        for p in &self.participants {
            if p.demand.len() != t {
                return Err(Error::SeriesLengthMismatch {
                    what: format!("demand of {} vs horizon", p.id),
                    left: p.demand.len(),
                    right: t,
                });
            }
            if p.demand.iter().any(|d| !d.is_finite() || *d < 0.0) {
                return Err(Error::Structure(format!(
                    "demand of {} must be finite and >= 0",
                    p.id
                )));
            }
        }
        if self.pv_per_panel.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Structure(
                "panel output must be finite and >= 0".into(),
            ));
        }
        if !(self.dt_hours > 0.0) {
            return Err(Error::Structure("dt must be positive".into()));
        }
        Ok(())
    }

    /// Builds the 96-hour instance from a configuration and its
    /// representative days.
    pub fn from_config(config: &RecConfig, repdays: &RepDaySet) -> Result<Self> {
        let mut demands = Vec::with_capacity(config.participants.len());
        for p in &config.participants {
            let days = repdays.demand_of(&p.id).ok_or_else(|| {
                Error::Structure(format!(
                    "representative days missing for participant {}",
                    p.id
                ))
            })?;
            demands.push(days.concatenated());
        }
        let dt = 1.0;
        let zeta = distribution_factors(&demands, dt)?;
        let pv_per_panel = panel_profile(
            &repdays.irradiance.concatenated(),
            &repdays.ambient.concatenated(),
            &config.pv,
        )?;
        let labels = repdays.irradiance.hour_labels();
        let rates = HourlyRates::from_schedule(&config.tariff, &labels);
        let participants = config
            .participants
            .iter()
            .zip(demands)
            .zip(zeta)
            .map(|((p, demand), zeta)| SizingParticipant {
                id: p.id.clone(),
                demand,
                max_panels: max_panels(p.roof_area_m2, &config.pv),
                max_batteries: config.bess.max_units,
                zeta,
            })
            .collect();
        let problem = SizingProblem {
            dt_hours: dt,
            day_len: 24,
            pv_per_panel,
            buy: rates.buy,
            sell: rates.sell,
            share: rates.share,
            participants,
            pv: config.pv.clone(),
            bess: config.bess.clone(),
            economics: config.economics.clone(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn rates(&self) -> HourlyRates {
        HourlyRates {
            buy: self.buy.clone(),
            sell: self.sell.clone(),
            share: self.share.clone(),
        }
    }
}

/// Upper bounds as JSON numbers, with `null` for +∞.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Best proven upper bound on the objective; `null` in JSON while
    /// unknown.
    #[serde(with = "unbounded")]
    pub bound: f64,
    /// Relative gap `(bound − objective) / max(1, |objective|)`.
    #[serde(with = "unbounded")]
    pub gap: f64,
    /// Whether the gap tolerance was reached before any limit.
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingSolution {
    pub ids: Vec<String>,
    pub n_pv: Vec<u32>,
    pub n_bess: Vec<u32>,
    pub dispatch: DispatchSolution,
    /// Community net profit over the horizon, €.
    pub objective: f64,
    pub stats: SolverStats,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_bound_round_trips() {
        let stats = SolverStats {
            nodes: 0,
            lp_iterations: 0,
            bound: f64::INFINITY,
            gap: f64::INFINITY,
            proven: false,
        };
        let text = serde_json::to_string(&stats).unwrap();
        assert!(text.contains("\"bound\":null"), "{text}");
        assert_eq!(serde_json::from_str::<SolverStats>(&text).unwrap(), stats);
        let finite = SolverStats {
            bound: 2.5,
            gap: 0.0,
            ..stats
        };
        assert_eq!(
            serde_json::from_str::<SolverStats>(&serde_json::to_string(&finite).unwrap()).unwrap(),
            finite
        );
    }
}
