//! Battery fleet model: state-of-charge dynamics, fleet bounds, dispatch
//! validation and cost components.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::BessSpec;

/// Default tolerance on `p_charge * p_discharge`, in kW².
pub const COMPLEMENTARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BessFleetBounds {
    pub soc_min_kwh: f64,
    pub soc_max_kwh: f64,
    pub p_charge_max_kw: f64,
    pub p_discharge_max_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BessFleetCosts {
    pub capex_eur: f64,
    pub omca_eur_per_year: f64,
    /// Year in which the whole fleet is bought again.
    pub replacement_year: u32,
}

/// One step of the energy-reservoir model.
pub fn soc_step(
    soc: f64,
    p_charge: f64,
    p_discharge: f64,
    dt: f64,
    spec: &BessSpec,
) -> Result<f64> {
    if p_charge < 0.0 || p_discharge < 0.0 {
        return Err(Error::domain(format!(
            "charge/discharge power must be >= 0, got {p_charge} / {p_discharge}"
        )));
    }
    Ok(soc + (spec.eta_charge * p_charge - p_discharge / spec.eta_discharge) * dt)
}

/// Inverse of [`soc_step`]: the state before a step that ended at `soc_next`.
pub fn soc_step_back(
    soc_next: f64,
    p_charge: f64,
    p_discharge: f64,
    dt: f64,
    spec: &BessSpec,
) -> f64 {
    soc_next - (spec.eta_charge * p_charge - p_discharge / spec.eta_discharge) * dt
}

pub fn fleet_bounds(n_units: u32, spec: &BessSpec) -> Result<BessFleetBounds> {
    if n_units > spec.max_units {
        return Err(Error::CapacityExceeded {
            requested: n_units,
            limit: spec.max_units,
        });
    }
    let n = f64::from(n_units);
    Ok(BessFleetBounds {
        soc_min_kwh: n * spec.soc_min_kwh,
        soc_max_kwh: n * spec.soc_max_kwh,
        p_charge_max_kw: n * spec.p_charge_max_kw,
        p_discharge_max_kw: n * spec.p_discharge_max_kw,
    })
}

pub fn bess_costs(n_units: u32, spec: &BessSpec) -> BessFleetCosts {
    let n = f64::from(n_units);
    BessFleetCosts {
        capex_eur: n * spec.unit_cost_eur(),
        omca_eur_per_year: n * spec.unit_omca_eur_per_year(),
        replacement_year: spec.lifespan_years,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchConstraint {
    ChargePowerBound,
    DischargePowerBound,
    NegativePower,
    Simultaneity,
    SocLowerBound,
    SocUpperBound,
    SocRecursion,
}

impl fmt::Display for DispatchConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::ChargePowerBound => "charge power bound",
            Self::DischargePowerBound => "discharge power bound",
            Self::NegativePower => "nonnegative power",
            Self::Simultaneity => "non-simultaneous charge/discharge",
            Self::SocLowerBound => "SOC lower bound",
            Self::SocUpperBound => "SOC upper bound",
            Self::SocRecursion => "SOC recursion",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchViolation {
    pub step: usize,
    pub constraint: DispatchConstraint,
    pub residual: f64,
}

/// Checks a fleet dispatch against power bounds, non-simultaneity, SOC
/// bounds and the SOC recursion.
///
/// `soc` holds the state at the start of every step; it may carry one
/// extra trailing entry for the state after the last step, in which case
/// the recursion is checked for every step.
pub fn validate_dispatch(
    soc: &[f64],
    p_charge: &[f64],
    p_discharge: &[f64],
    n_units: u32,
    spec: &BessSpec,
    dt: f64,
    tol: f64,
) -> Result<Vec<DispatchViolation>> {
    let steps = p_charge.len();
    if p_discharge.len() != steps {
        return Err(Error::SeriesLengthMismatch {
            what: "charge vs discharge".into(),
            left: steps,
            right: p_discharge.len(),
        });
    }
    if soc.len() != steps && soc.len() != steps + 1 {
        return Err(Error::SeriesLengthMismatch {
            what: "soc vs power".into(),
            left: soc.len(),
            right: steps,
        });
    }
    let bounds = fleet_bounds(n_units, spec)?;
    let mut out = Vec::new();
    let mut push = |step, constraint, residual: f64| {
        if residual > tol {
            out.push(DispatchViolation {
                step,
                constraint,
                residual,
            });
        }
    };

    for t in 0..steps {
        let (c, d) = (p_charge[t], p_discharge[t]);
        push(t, DispatchConstraint::NegativePower, (-c).max(-d));
        push(
            t,
            DispatchConstraint::ChargePowerBound,
            c - bounds.p_charge_max_kw,
        );
        push(
            t,
            DispatchConstraint::DischargePowerBound,
            d - bounds.p_discharge_max_kw,
        );
        push(t, DispatchConstraint::Simultaneity, c.max(0.0) * d.max(0.0));
    }
    for (t, &s) in soc.iter().enumerate() {
        push(t, DispatchConstraint::SocLowerBound, bounds.soc_min_kwh - s);
        push(t, DispatchConstraint::SocUpperBound, s - bounds.soc_max_kwh);
    }
    for t in 0..soc.len() - 1 {
        let expected =
            soc[t] + (spec.eta_charge * p_charge[t] - p_discharge[t] / spec.eta_discharge) * dt;
        push(
            t,
            DispatchConstraint::SocRecursion,
            (soc[t + 1] - expected).abs(),
        );
    }
    Ok(out)
}
