//! Solver-independent validation of a sizing solution.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bess::{validate_dispatch, DispatchConstraint};
use crate::economics::{net_profit, npv_trajectory, period_cashflow};
use crate::error::{Error, Result};

use super::{SizingProblem, SizingSolution};

/// Residual bound on flow constraints, and on `P^c · P^d` in kW².
pub const FLOW_TOL: f64 = 1e-6;
/// Residual bound on SOC periodicity.
pub const PERIODICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizingConstraint {
    /// Sold power is PV output minus self-consumption.
    SellBalance,
    /// Self-consumption is at most PV output.
    SelfBelowPv,
    /// Self-consumption is at most demand plus net charging.
    SelfBelowLoad,
    /// Shared power is at most the community's net deficit.
    ShareBelowDeficit,
    /// Shared power is at most the power sold.
    ShareBelowSold,
    /// Charging only from own PV.
    ChargeBelowPv,
    NegativeFlow,
    RoofLimit,
    BatteryLimit,
    Battery(DispatchConstraint),
    Periodicity,
    Shape,
}

impl fmt::Display for SizingConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SellBalance => f.write_str("sold = PV - self"),
            Self::SelfBelowPv => f.write_str("self <= PV"),
            Self::SelfBelowLoad => f.write_str("self <= demand + charge - discharge"),
            Self::ShareBelowDeficit => f.write_str("shared <= community deficit"),
            Self::ShareBelowSold => f.write_str("shared <= community sold"),
            Self::ChargeBelowPv => f.write_str("charge <= PV"),
            Self::NegativeFlow => f.write_str("nonnegative flow"),
            Self::RoofLimit => f.write_str("roof panel limit"),
            Self::BatteryLimit => f.write_str("battery unit limit"),
            Self::Battery(c) => write!(f, "battery: {c}"),
            Self::Periodicity => f.write_str("SOC periodicity"),
            Self::Shape => f.write_str("series shape"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingViolation {
    pub participant: Option<usize>,
    pub hour: Option<usize>,
    pub constraint: SizingConstraint,
    pub residual: f64,
}

impl fmt::Display for SizingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(p) = self.participant {
            write!(f, " participant {p}")?;
        }
        if let Some(t) = self.hour {
            write!(f, " hour {t}")?;
        }
        write!(f, " residual {:.3e}", self.residual)
    }
}

/// Re-validates every constraint of the sizing model against `sol`.
pub fn check_solution(problem: &SizingProblem, sol: &SizingSolution) -> Vec<SizingViolation> {
    let mut out = Vec::new();
    let mut push = |participant, hour, constraint, residual: f64, tol: f64| {
        if !(residual <= tol) {
            out.push(SizingViolation {
                participant,
                hour,
                constraint,
                residual,
            });
        }
    };
    let hours = problem.hours();
    let d = &sol.dispatch;
    let np = problem.participants.len();
    if d.participants.len() != np
        || sol.n_pv.len() != np
        || sol.n_bess.len() != np
        || d.p_share.len() != hours
    {
        push(None, None, SizingConstraint::Shape, f64::INFINITY, 0.0);
        return out;
    }

    let mut deficit = vec![0.0; hours];
    let mut sold = vec![0.0; hours];
    for (n, (part, flows)) in problem.participants.iter().zip(&d.participants).enumerate() {
        let lens = [
            flows.p_self.len(),
            flows.p_sell.len(),
            flows.p_charge.len(),
            flows.p_discharge.len(),
        ];
        if lens.iter().any(|&l| l != hours) || flows.soc.len() != hours + 1 {
            push(Some(n), None, SizingConstraint::Shape, f64::INFINITY, 0.0);
            continue;
        }
        let n_pv = sol.n_pv[n];
        let n_b = sol.n_bess[n];
        push(
            Some(n),
            None,
            SizingConstraint::RoofLimit,
            f64::from(n_pv) - f64::from(part.max_panels),
            0.0,
        );
        push(
            Some(n),
            None,
            SizingConstraint::BatteryLimit,
            f64::from(n_b) - f64::from(part.max_batteries),
            0.0,
        );

        for t in 0..hours {
            let pv = f64::from(n_pv) * problem.pv_per_panel[t];
            let (ps, pe) = (flows.p_self[t], flows.p_sell[t]);
            let (pc, pd) = (flows.p_charge[t], flows.p_discharge[t]);
            let neg = [ps, pe, pc, pd].iter().fold(0.0f64, |m, v| m.max(-v));
            push(
                Some(n),
                Some(t),
                SizingConstraint::NegativeFlow,
                neg,
                FLOW_TOL,
            );
            push(
                Some(n),
                Some(t),
                SizingConstraint::SellBalance,
                (pe - (pv - ps)).abs(),
                FLOW_TOL,
            );
            push(
                Some(n),
                Some(t),
                SizingConstraint::SelfBelowPv,
                ps - pv,
                FLOW_TOL,
            );
            push(
                Some(n),
                Some(t),
                SizingConstraint::SelfBelowLoad,
                ps - (part.demand[t] + pc - pd),
                FLOW_TOL,
            );
            push(
                Some(n),
                Some(t),
                SizingConstraint::ChargeBelowPv,
                pc - pv,
                FLOW_TOL,
            );
            deficit[t] += part.demand[t] + pc - pd - ps;
            sold[t] += pe;
        }

        match validate_dispatch(
            &flows.soc,
            &flows.p_charge,
            &flows.p_discharge,
            n_b,
            &problem.bess,
            problem.dt_hours,
            FLOW_TOL,
        ) {
            Ok(violations) => {
                for v in violations {
                    push(
                        Some(n),
                        Some(v.step),
                        SizingConstraint::Battery(v.constraint),
                        v.residual,
                        0.0,
                    );
                }
            }
            Err(_) => push(
                Some(n),
                None,
                SizingConstraint::BatteryLimit,
                f64::INFINITY,
                0.0,
            ),
        }

        for v in 1..=problem.days() {
            let end = v * problem.day_len;
            let start = (v - 1) * problem.day_len;
            let r = (flows.soc[end] - flows.soc[start]).abs();
            push(
                Some(n),
                Some(end),
                SizingConstraint::Periodicity,
                r,
                PERIODICITY_TOL,
            );
        }
    }
    for t in 0..hours {
        let sh = d.p_share[t];
        push(None, Some(t), SizingConstraint::NegativeFlow, -sh, FLOW_TOL);
        push(
            None,
            Some(t),
            SizingConstraint::ShareBelowDeficit,
            sh - deficit[t],
            FLOW_TOL,
        );
        push(
            None,
            Some(t),
            SizingConstraint::ShareBelowSold,
            sh - sold[t],
            FLOW_TOL,
        );
    }
    out
}

/// Net profit of `sol` recomputed through the cash-flow and NPV path.
pub fn recompute_net_profit(problem: &SizingProblem, sol: &SizingSolution) -> Result<f64> {
    let comps = period_cashflow(&sol.dispatch, &problem.rates(), problem.dt_hours)?;
    if comps.len() != problem.participants.len() {
        return Err(Error::Structure(
            "dispatch and problem disagree on participants".into(),
        ));
    }
    let trajectories = comps
        .iter()
        .zip(&problem.participants)
        .zip(sol.n_pv.iter().zip(&sol.n_bess))
        .map(|((c, part), (&npv, &nb))| {
            npv_trajectory(
                c,
                npv,
                nb,
                &problem.pv,
                &problem.bess,
                &problem.economics,
                part.zeta,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(net_profit(&trajectories))
}
