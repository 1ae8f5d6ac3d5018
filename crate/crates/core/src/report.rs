//! Post-hoc evaluation of a sizing: NPV trajectories, bills, incentives
//! and the hourly flows behind them.

use serde::{Deserialize, Serialize};

use crate::bess::bess_costs;
use crate::economics::{bill_after, npv_trajectory, period_cashflow};
use crate::error::{Error, Result};
use crate::pv::pv_costs;
use crate::sizing::{SizingProblem, SizingSolution};

/// Hourly flows of one participant over the representative horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyFlows {
    pub demand_kw: Vec<f64>,
    pub pv_kw: Vec<f64>,
    pub self_kw: Vec<f64>,
    pub sell_kw: Vec<f64>,
    pub charge_kw: Vec<f64>,
    pub discharge_kw: Vec<f64>,
    /// State of charge at the end of each hour.
    pub soc_kwh: Vec<f64>,
}

impl HourlyFlows {
    fn columns(&self) -> [&Vec<f64>; 7] {
        [
            &self.demand_kw,
            &self.pv_kw,
            &self.self_kw,
            &self.sell_kw,
            &self.charge_kw,
            &self.discharge_kw,
            &self.soc_kwh,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantReport {
    pub id: String,
    pub n_pv: u32,
    pub n_bess: u32,
    pub zeta: f64,
    pub pv_capex_eur: f64,
    pub bess_capex_eur: f64,
    pub bess_replacement_year: u32,
    pub annual_sell_revenue_eur: f64,
    pub annual_self_savings_eur: f64,
    /// This participant's share of the yearly sharing incentive.
    pub annual_incentive_eur: f64,
    pub annual_omca_eur: f64,
    pub bill_before_eur: f64,
    pub bill_after_eur: f64,
    /// Cumulative discounted cash flow at the end of years `0..=horizon`.
    pub npv_by_year: Vec<f64>,
    pub payback_year: Option<u32>,
    pub hourly: HourlyFlows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub discount_rate: f64,
    pub horizon_years: u32,
    pub season_days: f64,
    pub day_len: usize,
    /// Name of each periodic day, e.g. the season.
    pub day_names: Vec<String>,
    pub net_profit_eur: f64,
    pub shared_kw: Vec<f64>,
    pub participants: Vec<ParticipantReport>,
}

impl Report {
    pub fn hours(&self) -> usize {
        self.shared_kw.len()
    }

    /// Rejects reports whose series do not fit together.
    pub fn validate(&self) -> Result<()> {
        if self.participants.is_empty() {
            return Err(Error::Structure("report has no participants".into()));
        }
        let t = self.hours();
        if t == 0 || self.day_len == 0 || t != self.day_len * self.day_names.len() {
            return Err(Error::Structure(format!(
                "{t} hours do not split into {} days of {}",
                self.day_names.len(),
                self.day_len
            )));
        }
        let years = self.horizon_years as usize + 1;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.shared_kw) || !self.net_profit_eur.is_finite() {
            return Err(Error::Structure("community values must be finite".into()));
        }
        for p in &self.participants {
            if p.npv_by_year.len() != years || !finite(&p.npv_by_year) {
                return Err(Error::Structure(format!(
                    "participant {}: NPV needs {years} finite values",
                    p.id
                )));
            }
            if p.hourly
                .columns()
                .iter()
                .any(|c| c.len() != t || !finite(c))
            {
                return Err(Error::Structure(format!(
                    "participant {}: hourly flows need {t} finite values",
                    p.id
                )));
            }
            let money = [
                p.zeta,
                p.pv_capex_eur,
                p.bess_capex_eur,
                p.annual_sell_revenue_eur,
                p.annual_self_savings_eur,
                p.annual_incentive_eur,
                p.annual_omca_eur,
                p.bill_before_eur,
                p.bill_after_eur,
            ];
            if !finite(&money) {
                return Err(Error::Structure(format!(
                    "participant {}: non-finite amount",
                    p.id
                )));
            }
        }
        Ok(())
    }
}

/// Evaluates `solution` on `problem`. `bills_before` holds each
/// participant's yearly bill before joining, in problem order.
pub fn build_report(
    problem: &SizingProblem,
    solution: &SizingSolution,
    bills_before: &[f64],
    day_names: Vec<String>,
) -> Result<Report> {
    let n = problem.participants.len();
    if solution.n_pv.len() != n || solution.n_bess.len() != n || bills_before.len() != n {
        return Err(Error::Structure(
            "solution, problem and bills disagree on participants".into(),
        ));
    }
    if solution
        .ids
        .iter()
        .ne(problem.participants.iter().map(|p| &p.id))
    {
        return Err(Error::Structure(
            "solution participant ids do not match the problem".into(),
        ));
    }
    if day_names.len() != problem.days() {
        return Err(Error::Structure(format!(
            "{} day names for {} days",
            day_names.len(),
            problem.days()
        )));
    }
    let comps = period_cashflow(&solution.dispatch, &problem.rates(), problem.dt_hours)?;
    let econ = &problem.economics;
    let beta = econ.season_days;
    let mut participants = Vec::with_capacity(n);
    for (i, part) in problem.participants.iter().enumerate() {
        let (np, nb) = (solution.n_pv[i], solution.n_bess[i]);
        let c = &comps[i];
        let traj = npv_trajectory(c, np, nb, &problem.pv, &problem.bess, econ, part.zeta)?;
        let pc = pv_costs(np, &problem.pv);
        let bc = bess_costs(nb, &problem.bess);
        let d = &solution.dispatch.participants[i];
        participants.push(ParticipantReport {
            id: part.id.clone(),
            n_pv: np,
            n_bess: nb,
            zeta: part.zeta,
            pv_capex_eur: pc.capex_eur,
            bess_capex_eur: bc.capex_eur,
            bess_replacement_year: bc.replacement_year,
            annual_sell_revenue_eur: beta * c.r_sell,
            annual_self_savings_eur: beta * c.r_self,
            annual_incentive_eur: beta * part.zeta * c.i_sh,
            annual_omca_eur: pc.omca_eur_per_year + bc.omca_eur_per_year,
            bill_before_eur: bills_before[i],
            bill_after_eur: bill_after(bills_before[i], c, part.zeta, beta),
            npv_by_year: traj.npv_by_year,
            payback_year: traj.payback,
            hourly: HourlyFlows {
                demand_kw: part.demand.clone(),
                pv_kw: problem
                    .pv_per_panel
                    .iter()
                    .map(|g| g * f64::from(np))
                    .collect(),
                self_kw: d.p_self.clone(),
                sell_kw: d.p_sell.clone(),
                charge_kw: d.p_charge.clone(),
                discharge_kw: d.p_discharge.clone(),
                soc_kwh: d.soc.iter().skip(1).copied().collect(),
            },
        });
    }
    let report = Report {
        discount_rate: econ.discount_rate,
        horizon_years: econ.horizon_years,
        season_days: beta,
        day_len: problem.day_len,
        day_names,
        net_profit_eur: participants
            .iter()
            .map(|p| *p.npv_by_year.last().unwrap_or(&0.0))
            .sum(),
        shared_kw: solution.dispatch.p_share.clone(),
        participants,
    };
    report.validate()?;
    Ok(report)
}
