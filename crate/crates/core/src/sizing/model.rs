//! MILP assembly.
//!
//! Variable layout, per participant `n` in order, then the community:
//!
//! ```text
//! N^p, N^b,
//! for t in 0..T: b^c_t, b^d_t, P^self_t, P^sell_t, P^c_t, P^d_t,
//! S_0 ..= S_T
//! ...
//! P^sh_0 .. P^sh_{T-1}
//! ```
//!
//! giving `N(7T + 3) + T` columns.

use crate::dispatch::{DispatchSolution, ParticipantDispatch};
use crate::error::Result;
use crate::lp::{LinearProgram, Sense};

use super::SizingProblem;

/// Objective penalty per installed unit, steering ties to smaller sizings.
pub const TIE_BREAK_PENALTY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarIndex {
    pub participants: usize,
    pub hours: usize,
}

impl VarIndex {
    pub fn per_participant(&self) -> usize {
        7 * self.hours + 3
    }

    pub fn total(&self) -> usize {
        self.participants * self.per_participant() + self.hours
    }

    fn base(&self, n: usize) -> usize {
        n * self.per_participant()
    }

    pub fn n_pv(&self, n: usize) -> usize {
        self.base(n)
    }

    pub fn n_bess(&self, n: usize) -> usize {
        self.base(n) + 1
    }

    fn hour(&self, n: usize, t: usize) -> usize {
        self.base(n) + 2 + 6 * t
    }

    pub fn b_charge(&self, n: usize, t: usize) -> usize {
        self.hour(n, t)
    }

    pub fn b_discharge(&self, n: usize, t: usize) -> usize {
        self.hour(n, t) + 1
    }

    pub fn p_self(&self, n: usize, t: usize) -> usize {
        self.hour(n, t) + 2
    }

    pub fn p_sell(&self, n: usize, t: usize) -> usize {
        self.hour(n, t) + 3
    }

    pub fn p_charge(&self, n: usize, t: usize) -> usize {
        self.hour(n, t) + 4
    }

    pub fn p_discharge(&self, n: usize, t: usize) -> usize {
        self.hour(n, t) + 5
    }

    /// State of charge at the start of hour `t`; `t == hours` is the end.
    pub fn soc(&self, n: usize, t: usize) -> usize {
        self.base(n) + 2 + 6 * self.hours + t
    }

    pub fn p_share(&self, t: usize) -> usize {
        self.participants * self.per_participant() + t
    }
}

/// The assembled program with its bookkeeping.
#[derive(Debug, Clone)]
pub struct MilpModel {
    /// Relaxation with the tie-break penalty included in the objective.
    pub lp: LinearProgram,
    pub index: VarIndex,
    /// Net-profit coefficients without the tie-break penalty.
    pub net_profit: Vec<f64>,
    /// Integer sizing variables.
    pub integers: Vec<usize>,
}

/// Discounted economic weights shared by the objective and payback rows.
pub(crate) struct Weights {
    /// Σ (1+r)^-y over operating years.
    pub annuity: f64,
    pub beta: f64,
    pub panel: f64,
    pub battery: f64,
}

pub(crate) fn weights(p: &SizingProblem, through: u32) -> Weights {
    let econ = &p.economics;
    let annuity = econ.operating_annuity(through);
    let replace = p.bess.lifespan_years;
    let replacement = if replace > 0 && replace <= through {
        econ.discount(replace)
    } else {
        0.0
    };
    Weights {
        annuity,
        beta: econ.season_days,
        panel: p.pv.panel_cost_eur() + annuity * p.pv.panel_omca_eur_per_year(),
        battery: p.bess.unit_cost_eur() * (1.0 + replacement)
            + annuity * p.bess.unit_omca_eur_per_year(),
    }
}

/// Linear NPV of participant `n` through year `through`, as sparse
/// coefficients.
fn npv_row(p: &SizingProblem, ix: &VarIndex, n: usize, through: u32) -> Vec<(usize, f64)> {
    let w = weights(p, through);
    let k = w.annuity * w.beta * p.dt_hours;
    let zeta = p.participants[n].zeta;
    let mut row = vec![(ix.n_pv(n), -w.panel), (ix.n_bess(n), -w.battery)];
    for t in 0..p.hours() {
        row.push((ix.p_self(n, t), k * p.buy[t]));
        row.push((ix.p_sell(n, t), k * p.sell[t]));
        row.push((ix.p_share(t), k * zeta * p.share[t]));
    }
    row
}

pub fn assemble_milp(p: &SizingProblem) -> Result<MilpModel> {
    p.validate()?;
    let t_len = p.hours();
    let ix = VarIndex {
        participants: p.participants.len(),
        hours: t_len,
    };
    let inf = f64::INFINITY;
    let dt = p.dt_hours;
    let b = &p.bess;
    let horizon = p.economics.horizon_years;
    let w = weights(p, horizon);
    let k = w.annuity * w.beta * dt;
    let zeta_total: f64 = p.participants.iter().map(|q| q.zeta).sum();

    let mut lp = LinearProgram::new();
    let mut integers = Vec::new();
    for part in &p.participants {
        let np = lp.add_var(-w.panel, 0.0, f64::from(part.max_panels));
        let nb = lp.add_var(-w.battery, 0.0, f64::from(part.max_batteries));
        integers.extend([np, nb]);
        for t in 0..t_len {
            lp.add_var(0.0, 0.0, 1.0);
            lp.add_var(0.0, 0.0, 1.0);
            lp.add_var(k * p.buy[t], 0.0, inf);
            lp.add_var(k * p.sell[t], 0.0, inf);
            lp.add_var(0.0, 0.0, inf);
            lp.add_var(0.0, 0.0, inf);
        }
        for _ in 0..=t_len {
            lp.add_var(0.0, 0.0, inf);
        }
    }
    for t in 0..t_len {
        lp.add_var(k * zeta_total * p.share[t], 0.0, inf);
    }
    debug_assert_eq!(lp.num_vars(), ix.total());

    for (n, part) in p.participants.iter().enumerate() {
        let np = ix.n_pv(n);
        let nb = ix.n_bess(n);
        let big_c = f64::from(part.max_batteries) * b.p_charge_max_kw;
        let big_d = f64::from(part.max_batteries) * b.p_discharge_max_kw;
        for t in 0..t_len {
            let pv = p.pv_per_panel[t];
            let (bc, bd) = (ix.b_charge(n, t), ix.b_discharge(n, t));
            let (ps, pe) = (ix.p_self(n, t), ix.p_sell(n, t));
            let (pc, pd) = (ix.p_charge(n, t), ix.p_discharge(n, t));
            lp.add_constraint(vec![(pe, 1.0), (ps, 1.0), (np, -pv)], Sense::Eq, 0.0);
            lp.add_constraint(vec![(ps, 1.0), (np, -pv)], Sense::Le, 0.0);
            lp.add_constraint(
                vec![(ps, 1.0), (pc, -1.0), (pd, 1.0)],
                Sense::Le,
                part.demand[t],
            );
            lp.add_constraint(vec![(pc, 1.0), (np, -pv)], Sense::Le, 0.0);
            // a charging hour is capped by the largest PV output, a
            // discharging hour by demand
            let m_c = big_c.min(f64::from(part.max_panels) * pv);
            let m_d = big_d.min(part.demand[t]);
            lp.add_constraint(vec![(pc, 1.0), (bc, -m_c)], Sense::Le, 0.0);
            lp.add_constraint(vec![(pd, 1.0), (bd, -m_d)], Sense::Le, 0.0);
            lp.add_constraint(vec![(pc, 1.0), (nb, -b.p_charge_max_kw)], Sense::Le, 0.0);
            lp.add_constraint(vec![(pd, 1.0), (nb, -b.p_discharge_max_kw)], Sense::Le, 0.0);
            lp.add_constraint(vec![(bc, 1.0), (bd, 1.0)], Sense::Le, 1.0);
            // valid for integer points: at most one of the two flows is nonzero
            lp.add_constraint(
                vec![
                    (pc, 1.0 / b.p_charge_max_kw),
                    (pd, 1.0 / b.p_discharge_max_kw),
                    (nb, -1.0),
                ],
                Sense::Le,
                0.0,
            );
            lp.add_constraint(
                vec![
                    (ix.soc(n, t + 1), 1.0),
                    (ix.soc(n, t), -1.0),
                    (pc, -b.eta_charge * dt),
                    (pd, dt / b.eta_discharge),
                ],
                Sense::Eq,
                0.0,
            );
        }
        for t in 0..=t_len {
            lp.add_constraint(
                vec![(ix.soc(n, t), 1.0), (nb, -b.soc_max_kwh)],
                Sense::Le,
                0.0,
            );
            lp.add_constraint(
                vec![(ix.soc(n, t), 1.0), (nb, -b.soc_min_kwh)],
                Sense::Ge,
                0.0,
            );
        }
        for v in 1..=p.days() {
            lp.add_constraint(
                vec![
                    (ix.soc(n, v * p.day_len), 1.0),
                    (ix.soc(n, (v - 1) * p.day_len), -1.0),
                ],
                Sense::Eq,
                0.0,
            );
        }
    }
    for t in 0..t_len {
        let mut deficit = vec![(ix.p_share(t), 1.0)];
        let mut sold = vec![(ix.p_share(t), 1.0)];
        let mut total_demand = 0.0;
        for (n, part) in p.participants.iter().enumerate() {
            deficit.push((ix.p_self(n, t), 1.0));
            deficit.push((ix.p_charge(n, t), -1.0));
            deficit.push((ix.p_discharge(n, t), 1.0));
            sold.push((ix.p_sell(n, t), -1.0));
            total_demand += part.demand[t];
        }
        lp.add_constraint(deficit, Sense::Le, total_demand);
        lp.add_constraint(sold, Sense::Le, 0.0);
    }

    if let Some(m) = p.economics.max_payback_years {
        // payback by year m: NPV stays nonnegative from m to the horizon
        for n in 0..p.participants.len() {
            for year in m..=horizon {
                lp.add_constraint(npv_row(p, &ix, n, year), Sense::Ge, 0.0);
            }
        }
    }

    let net_profit = lp.objective.clone();
    for &j in &integers {
        lp.objective[j] -= TIE_BREAK_PENALTY;
    }
    Ok(MilpModel {
        lp,
        index: ix,
        net_profit,
        integers,
    })
}

impl MilpModel {
    pub fn net_profit_of(&self, x: &[f64]) -> f64 {
        self.net_profit.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Dispatch encoded in `x`, with sub-tolerance negatives cleared.
    pub fn dispatch(&self, p: &SizingProblem, x: &[f64]) -> DispatchSolution {
        let ix = &self.index;
        let clean = |v: f64| if v.abs() < 1e-9 { 0.0 } else { v.max(0.0) };
        let participants = (0..ix.participants)
            .map(|n| {
                let hours = 0..ix.hours;
                let p_charge: Vec<f64> =
                    hours.clone().map(|t| clean(x[ix.p_charge(n, t)])).collect();
                let p_discharge: Vec<f64> = hours
                    .clone()
                    .map(|t| clean(x[ix.p_discharge(n, t)]))
                    .collect();
                let b_charge: Vec<bool> = p_charge.iter().map(|&c| c > 0.0).collect();
                let b_discharge: Vec<bool> = p_discharge
                    .iter()
                    .zip(&b_charge)
                    .map(|(&d, &c)| d > 0.0 && !c)
                    .collect();
                ParticipantDispatch {
                    p_self: hours.clone().map(|t| clean(x[ix.p_self(n, t)])).collect(),
                    p_sell: hours.clone().map(|t| clean(x[ix.p_sell(n, t)])).collect(),
                    p_charge,
                    p_discharge,
                    soc: (0..=ix.hours).map(|t| clean(x[ix.soc(n, t)])).collect(),
                    b_charge,
                    b_discharge,
                }
            })
            .collect();
        DispatchSolution {
            dt_hours: p.dt_hours,
            day_len: p.day_len,
            participants,
            p_share: (0..ix.hours).map(|t| clean(x[ix.p_share(t)])).collect(),
        }
    }
}
