//! Exhaustive reference solver for tiny instances.
//!
//! Every panel/battery tuple is enumerated, and for each tuple every
//! charge/discharge pattern over the hours where a battery could charge.
//! With counts and modes fixed the remaining problem is a pure LP, built
//! here without the branch-and-bound model.

use crate::economics::{npv_trajectory, CashFlowComponents};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense};

use super::{SizingProblem, SizingSolution, SolverStats};
use crate::dispatch::{DispatchSolution, ParticipantDispatch};

/// Instance size accepted by [`brute_force_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub participants: usize,
    pub hours: usize,
    pub panels: u32,
    pub batteries: u32,
    /// Upper bound on LPs solved.
    pub max_lps: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            participants: 2,
            hours: 8,
            panels: 3,
            batteries: 1,
            max_lps: 1 << 16,
        }
    }
}

/// Per-year NPV as `constant + slope · income`, income per representative span.
struct Affine {
    constant: Vec<f64>,
    slope: Vec<f64>,
}

fn affine_npv(p: &SizingProblem, n: usize, n_pv: u32, n_bess: u32) -> Result<Affine> {
    let zeta = p.participants[n].zeta;
    let at = |income: f64| {
        let c = CashFlowComponents {
            r_self: income,
            ..Default::default()
        };
        npv_trajectory(&c, n_pv, n_bess, &p.pv, &p.bess, &p.economics, zeta).map(|t| t.npv_by_year)
    };
    let zero = at(0.0)?;
    let one = at(1.0)?;
    Ok(Affine {
        slope: one.iter().zip(&zero).map(|(a, b)| a - b).collect(),
        constant: zero,
    })
}

struct Layout {
    participants: usize,
    hours: usize,
}

impl Layout {
    fn stride(&self) -> usize {
        4 * self.hours + self.hours + 1
    }
    fn p_self(&self, n: usize, t: usize) -> usize {
        n * self.stride() + 4 * t
    }
    fn p_sell(&self, n: usize, t: usize) -> usize {
        self.p_self(n, t) + 1
    }
    fn p_charge(&self, n: usize, t: usize) -> usize {
        self.p_self(n, t) + 2
    }
    fn p_discharge(&self, n: usize, t: usize) -> usize {
        self.p_self(n, t) + 3
    }
    fn soc(&self, n: usize, t: usize) -> usize {
        n * self.stride() + 4 * self.hours + t
    }
    fn p_share(&self, t: usize) -> usize {
        self.participants * self.stride() + t
    }
}

/// Income of participant `n` per representative span, as coefficients.
fn income_row(p: &SizingProblem, lay: &Layout, n: usize) -> Vec<(usize, f64)> {
    let dt = p.dt_hours;
    let zeta = p.participants[n].zeta;
    let mut row = Vec::new();
    for t in 0..lay.hours {
        row.push((lay.p_self(n, t), p.buy[t] * dt));
        row.push((lay.p_sell(n, t), p.sell[t] * dt));
        row.push((lay.p_share(t), zeta * p.share[t] * dt));
    }
    row
}

/// The LP for fixed counts and modes; `charging[n][t]` selects the mode of
/// every hour (`true` forbids discharging, `false` forbids charging).
fn fixed_lp(
    p: &SizingProblem,
    n_pv: &[u32],
    n_bess: &[u32],
    charging: &[Vec<bool>],
    npv: &[Affine],
) -> LinearProgram {
    let lay = Layout {
        participants: p.participants.len(),
        hours: p.hours(),
    };
    let b = &p.bess;
    let dt = p.dt_hours;
    let inf = f64::INFINITY;
    let mut lp = LinearProgram::new();
    for n in 0..lay.participants {
        let units = f64::from(n_bess[n]);
        for t in 0..lay.hours {
            let pv = f64::from(n_pv[n]) * p.pv_per_panel[t];
            lp.add_var(0.0, 0.0, pv);
            lp.add_var(0.0, 0.0, pv);
            let c_max = if charging[n][t] {
                (units * b.p_charge_max_kw).min(pv)
            } else {
                0.0
            };
            let d_max = if charging[n][t] {
                0.0
            } else {
                units * b.p_discharge_max_kw
            };
            lp.add_var(0.0, 0.0, c_max);
            lp.add_var(0.0, 0.0, d_max);
        }
        for _ in 0..=lay.hours {
            lp.add_var(0.0, units * b.soc_min_kwh, units * b.soc_max_kwh);
        }
    }
    for _ in 0..lay.hours {
        lp.add_var(0.0, 0.0, inf);
    }
    let slope_end: Vec<f64> = npv
        .iter()
        .map(|a| *a.slope.last().unwrap_or(&0.0))
        .collect();
    for (n, s) in slope_end.iter().enumerate() {
        for (j, c) in income_row(p, &lay, n) {
            lp.objective[j] += s * c;
        }
    }

    for n in 0..lay.participants {
        let part = &p.participants[n];
        for t in 0..lay.hours {
            let pv = f64::from(n_pv[n]) * p.pv_per_panel[t];
            let (ps, pe) = (lay.p_self(n, t), lay.p_sell(n, t));
            let (pc, pd) = (lay.p_charge(n, t), lay.p_discharge(n, t));
            lp.add_constraint(vec![(ps, 1.0), (pe, 1.0)], Sense::Eq, pv);
            lp.add_constraint(
                vec![(ps, 1.0), (pc, -1.0), (pd, 1.0)],
                Sense::Le,
                part.demand[t],
            );
            lp.add_constraint(
                vec![
                    (lay.soc(n, t + 1), 1.0),
                    (lay.soc(n, t), -1.0),
                    (pc, -b.eta_charge * dt),
                    (pd, dt / b.eta_discharge),
                ],
                Sense::Eq,
                0.0,
            );
        }
        for d in 1..=p.days() {
            lp.add_constraint(
                vec![
                    (lay.soc(n, d * p.day_len), 1.0),
                    (lay.soc(n, (d - 1) * p.day_len), -1.0),
                ],
                Sense::Eq,
                0.0,
            );
        }
    }
    for t in 0..lay.hours {
        let total: f64 = p.participants.iter().map(|q| q.demand[t]).sum();
        let mut deficit = vec![(lay.p_share(t), 1.0)];
        let mut sold = vec![(lay.p_share(t), 1.0)];
        for n in 0..lay.participants {
            deficit.extend([
                (lay.p_self(n, t), 1.0),
                (lay.p_charge(n, t), -1.0),
                (lay.p_discharge(n, t), 1.0),
            ]);
            sold.push((lay.p_sell(n, t), -1.0));
        }
        lp.add_constraint(deficit, Sense::Le, total);
        lp.add_constraint(sold, Sense::Le, 0.0);
    }
    if let Some(m) = p.economics.max_payback_years {
        for (n, a) in npv.iter().enumerate() {
            let row = income_row(p, &lay, n);
            for year in (m as usize)..a.constant.len() {
                let coeffs = row.iter().map(|&(j, c)| (j, c * a.slope[year])).collect();
                lp.add_constraint(coeffs, Sense::Ge, -a.constant[year]);
            }
        }
    }
    lp
}

fn dispatch_of(p: &SizingProblem, x: &[f64], charging: &[Vec<bool>]) -> DispatchSolution {
    let lay = Layout {
        participants: p.participants.len(),
        hours: p.hours(),
    };
    let clean = |v: f64| if v.abs() < 1e-9 { 0.0 } else { v.max(0.0) };
    let participants = (0..lay.participants)
        .map(|n| {
            let hours = 0..lay.hours;
            let p_charge: Vec<f64> = hours
                .clone()
                .map(|t| clean(x[lay.p_charge(n, t)]))
                .collect();
            let p_discharge: Vec<f64> = hours
                .clone()
                .map(|t| clean(x[lay.p_discharge(n, t)]))
                .collect();
            ParticipantDispatch {
                p_self: hours.clone().map(|t| clean(x[lay.p_self(n, t)])).collect(),
                p_sell: hours.clone().map(|t| clean(x[lay.p_sell(n, t)])).collect(),
                b_charge: hours
                    .clone()
                    .map(|t| charging[n][t] && p_charge[t] > 0.0)
                    .collect(),
                b_discharge: hours
                    .clone()
                    .map(|t| !charging[n][t] && p_discharge[t] > 0.0)
                    .collect(),
                p_charge,
                p_discharge,
                soc: (0..=lay.hours).map(|t| clean(x[lay.soc(n, t)])).collect(),
            }
        })
        .collect();
    DispatchSolution {
        dt_hours: p.dt_hours,
        day_len: p.day_len,
        participants,
        p_share: (0..lay.hours).map(|t| clean(x[lay.p_share(t)])).collect(),
    }
}

/// Solves `problem` by enumeration, with [`OracleLimits::default`].
pub fn brute_force_oracle(problem: &SizingProblem) -> Result<SizingSolution> {
    brute_force_oracle_with(problem, &OracleLimits::default())
}

/// Solves `problem` by enumeration. Ties keep the first tuple in
/// lexicographic order.
pub fn brute_force_oracle_with(
    problem: &SizingProblem,
    limits: &OracleLimits,
) -> Result<SizingSolution> {
    problem.validate()?;
    let parts = &problem.participants;
    let too_big = parts.len() > limits.participants
        || problem.hours() > limits.hours
        || parts
            .iter()
            .any(|q| q.max_panels > limits.panels || q.max_batteries > limits.batteries);
    if too_big {
        return Err(Error::OracleLimitExceeded(format!(
            "{} participants × {} hours exceeds {} × {} with at most {} panels and {} batteries",
            parts.len(),
            problem.hours(),
            limits.participants,
            limits.hours,
            limits.panels,
            limits.batteries
        )));
    }

    let mut tuples: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
    for q in parts {
        let mut next = Vec::new();
        for prefix in &tuples {
            for np in 0..=q.max_panels {
                for nb in 0..=q.max_batteries {
                    let mut t = prefix.clone();
                    t.push((np, nb));
                    next.push(t);
                }
            }
        }
        tuples = next;
    }

    let sunny: Vec<usize> = (0..problem.hours())
        .filter(|&t| problem.pv_per_panel[t] > 0.0)
        .collect();
    let mut planned = 0usize;
    for tuple in &tuples {
        let free = tuple.iter().filter(|(np, nb)| *np > 0 && *nb > 0).count() * sunny.len();
        planned = planned.saturating_add(1usize.checked_shl(free as u32).unwrap_or(usize::MAX));
    }
    if planned > limits.max_lps {
        return Err(Error::OracleLimitExceeded(format!(
            "{planned} mode patterns exceed {}",
            limits.max_lps
        )));
    }

    let mut best: Option<(f64, Vec<u32>, Vec<u32>, Vec<f64>, Vec<Vec<bool>>)> = None;
    let mut lps = 0usize;
    let mut iterations = 0usize;
    for tuple in &tuples {
        let n_pv: Vec<u32> = tuple.iter().map(|t| t.0).collect();
        let n_bess: Vec<u32> = tuple.iter().map(|t| t.1).collect();
        let npv = (0..parts.len())
            .map(|n| affine_npv(problem, n, n_pv[n], n_bess[n]))
            .collect::<Result<Vec<_>>>()?;
        let constant: f64 = npv.iter().map(|a| *a.constant.last().unwrap_or(&0.0)).sum();
        let movable: Vec<usize> = (0..parts.len())
            .filter(|&n| n_pv[n] > 0 && n_bess[n] > 0)
            .collect();
        let free = movable.len() * sunny.len();
        for pattern in 0u64..(1u64 << free) {
            let mut charging = vec![vec![false; problem.hours()]; parts.len()];
            for (k, &n) in movable.iter().enumerate() {
                for (i, &t) in sunny.iter().enumerate() {
                    charging[n][t] = pattern >> (k * sunny.len() + i) & 1 == 1;
                }
            }
            let lp = fixed_lp(problem, &n_pv, &n_bess, &charging, &npv);
            let sol = solve_lp(&lp)?;
            lps += 1;
            iterations += sol.iterations;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return Err(Error::Numerical("fixed-mode program is unbounded".into()))
                }
            }
            let value = constant + sol.objective;
            if best
                .as_ref()
                .is_none_or(|b| value > b.0 + 1e-9 * b.0.abs().max(1.0))
            {
                best = Some((value, n_pv.clone(), n_bess.clone(), sol.x, charging));
            }
        }
    }

    let (objective, n_pv, n_bess, x, charging) = best.ok_or(Error::Infeasible)?;
    Ok(SizingSolution {
        ids: parts.iter().map(|q| q.id.clone()).collect(),
        n_pv,
        n_bess,
        dispatch: dispatch_of(problem, &x, &charging),
        objective,
        stats: SolverStats {
            nodes: lps,
            lp_iterations: iterations,
            bound: objective,
            gap: 0.0,
            proven: true,
        },
    })
}
