//! Cash flows, distribution factors, NPV trajectories, payback and bills.
//!
//! Representative-day quantities are annualised by multiplying the sum
//! over the four seasonal days by the season length. Purchased energy
//! does not enter the NPV; it only shows up in the bill.

use serde::{Deserialize, Serialize};

use crate::bess::bess_costs;
use crate::dispatch::DispatchSolution;
use crate::error::{Error, Result};
use crate::pv::pv_costs;
use crate::tariff::HourlyRates;
use crate::types::{BessSpec, EconomicParams, PvSpec};

/// Flows below this are treated as rounding noise rather than errors.
const NEGATIVE_FLOW_TOL: f64 = 1e-7;

/// Money earned over one accounting span (here: the representative days).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CashFlowComponents {
    /// Revenue from energy sold to the grid.
    pub r_sell: f64,
    /// Savings from self-consumed energy.
    pub r_self: f64,
    /// Community-level sharing incentive, before distribution.
    pub i_sh: f64,
}

impl CashFlowComponents {
    /// The participant's share of the span's income.
    pub fn participant_income(&self, zeta: f64) -> f64 {
        self.r_sell + self.r_self + zeta * self.i_sh
    }
}

/// Revenue, savings and incentive of every participant over the dispatch
/// horizon.
pub fn period_cashflow(
    dispatch: &DispatchSolution,
    rates: &HourlyRates,
    dt: f64,
) -> Result<Vec<CashFlowComponents>> {
    let hours = dispatch.hours();
    if rates.len() != hours {
        return Err(Error::SeriesLengthMismatch {
            what: "rates vs dispatch".into(),
            left: rates.len(),
            right: hours,
        });
    }
    check_nonnegative("p_share", &dispatch.p_share)?;
    let i_sh: f64 = dispatch
        .p_share
        .iter()
        .zip(&rates.share)
        .map(|(p, c)| c * p.max(0.0) * dt)
        .sum();

    dispatch
        .participants
        .iter()
        .map(|p| {
            if p.p_sell.len() != hours || p.p_self.len() != hours {
                return Err(Error::SeriesLengthMismatch {
                    what: "participant flows vs horizon".into(),
                    left: p.p_sell.len(),
                    right: hours,
                });
            }
            check_nonnegative("p_sell", &p.p_sell)?;
            check_nonnegative("p_self", &p.p_self)?;
            let r_sell = dot(&rates.sell, &p.p_sell) * dt;
            let r_self = dot(&rates.buy, &p.p_self) * dt;
            Ok(CashFlowComponents {
                r_sell,
                r_self,
                i_sh,
            })
        })
        .collect()
}

fn dot(rate: &[f64], flow: &[f64]) -> f64 {
    rate.iter().zip(flow).map(|(c, p)| c * p.max(0.0)).sum()
}

fn check_nonnegative(name: &str, v: &[f64]) -> Result<()> {
    match v
        .iter()
        .position(|&x| x < -NEGATIVE_FLOW_TOL || !x.is_finite())
    {
        Some(i) => Err(Error::domain(format!("{name}[{i}] = {} is negative", v[i]))),
        None => Ok(()),
    }
}

/// Demand-proportional share of the sharing incentive.
pub fn distribution_factors<S: AsRef<[f64]>>(demands: &[S], dt: f64) -> Result<Vec<f64>> {
    if demands.is_empty() {
        return Err(Error::DegenerateDemand);
    }
    let energies: Vec<f64> = demands
        .iter()
        .map(|d| d.as_ref().iter().sum::<f64>() * dt)
        .collect();
    if energies.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::domain(
            "demand energies must be finite and nonnegative",
        ));
    }
    let total: f64 = energies.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateDemand);
    }
    Ok(energies.into_iter().map(|e| e / total).collect())
}

/// Investment and operating net per year `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CashFlowLedger {
    pub investment: Vec<f64>,
    pub operating: Vec<f64>,
}

impl CashFlowLedger {
    /// Ledger of a participant owning `n_pv` panels and `n_bess` batteries
    /// whose installation earns `annual_income` per operating year.
    pub fn build(
        n_pv: u32,
        n_bess: u32,
        pv: &PvSpec,
        bess: &BessSpec,
        econ: &EconomicParams,
        annual_income: f64,
    ) -> Self {
        let years = econ.horizon_years as usize + 1;
        let pc = pv_costs(n_pv, pv);
        let bc = bess_costs(n_bess, bess);
        let mut investment = vec![0.0; years];
        investment[0] = pc.capex_eur + bc.capex_eur;
        let replace = bc.replacement_year as usize;
        if n_bess > 0 && replace > 0 && replace < years {
            investment[replace] += bc.capex_eur;
        }
        let omca = pc.omca_eur_per_year + bc.omca_eur_per_year;
        let first = econ.first_operating_year() as usize;
        let operating = (0..years)
            .map(|y| {
                if y >= first {
                    annual_income - omca
                } else {
                    0.0
                }
            })
            .collect();
        CashFlowLedger {
            investment,
            operating,
        }
    }

    pub fn net(&self, year: usize) -> f64 {
        self.operating[year] - self.investment[year]
    }

    pub fn years(&self) -> usize {
        self.investment.len()
    }
}

/// Cumulative discounted net cash flow, one entry per year.
pub fn discounted_cumulative(ledger: &CashFlowLedger, rate: f64) -> Result<Vec<f64>> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!(
            "discount rate must be >= 0, got {rate}"
        )));
    }
    let mut acc = 0.0;
    Ok((0..ledger.years())
        .map(|y| {
            acc += ledger.net(y) / (1.0 + rate).powi(y as i32);
            acc
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpvTrajectory {
    pub npv_by_year: Vec<f64>,
    pub payback: Option<u32>,
}

impl NpvTrajectory {
    pub fn terminal(&self) -> f64 {
        self.npv_by_year.last().copied().unwrap_or(0.0)
    }
}

/// NPV trajectory of one participant from its representative-day cash flows.
pub fn npv_trajectory(
    components: &CashFlowComponents,
    n_pv: u32,
    n_bess: u32,
    pv: &PvSpec,
    bess: &BessSpec,
    econ: &EconomicParams,
    zeta: f64,
) -> Result<NpvTrajectory> {
    let income = econ.season_days * components.participant_income(zeta);
    let ledger = CashFlowLedger::build(n_pv, n_bess, pv, bess, econ, income);
    let npv_by_year = discounted_cumulative(&ledger, econ.discount_rate)?;
    let payback = payback(&npv_by_year);
    Ok(NpvTrajectory {
        npv_by_year,
        payback,
    })
}

/// First year from which the NPV stays nonnegative through the horizon.
pub fn payback(npv_by_year: &[f64]) -> Option<u32> {
    let last_negative = npv_by_year.iter().rposition(|&v| v < 0.0);
    let start = last_negative.map_or(0, |i| i + 1);
    (start < npv_by_year.len()).then_some(start as u32)
}

/// Community net profit: sum of terminal NPVs.
pub fn net_profit(trajectories: &[NpvTrajectory]) -> f64 {
    trajectories.iter().map(NpvTrajectory::terminal).sum()
}

/// Yearly bill after joining.
pub fn bill_after(eb_before: f64, components: &CashFlowComponents, zeta: f64, beta: f64) -> f64 {
    eb_before - beta * components.participant_income(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::ParticipantDispatch;
    use proptest::prelude::*;

    fn econ(r: f64) -> EconomicParams {
        EconomicParams {
            discount_rate: r,
            ..EconomicParams::default()
        }
    }

    fn one_hour_dispatch(p_self: f64, p_sell: f64, p_share: f64) -> DispatchSolution {
        let mut p = ParticipantDispatch::idle(1, 0.0);
        p.p_self[0] = p_self;
        p.p_sell[0] = p_sell;
        DispatchSolution {
            dt_hours: 1.0,
            day_len: 1,
            participants: vec![p],
            p_share: vec![p_share],
        }
    }

    fn rates(buy: f64, sell: f64, share: f64) -> HourlyRates {
        HourlyRates {
            buy: vec![buy],
            sell: vec![sell],
            share: vec![share],
        }
    }

    #[test]
    fn cashflow_examples() {
        let zero = period_cashflow(
            &one_hour_dispatch(0.0, 0.0, 0.0),
            &rates(0.195, 0.075, 0.11822),
            1.0,
        )
        .unwrap();
        assert_eq!(zero[0], CashFlowComponents::default());

        let shared = period_cashflow(
            &one_hour_dispatch(0.0, 0.0, 1.0),
            &rates(0.195, 0.075, 0.11 + 0.00822),
            1.0,
        )
        .unwrap();
        assert!((shared[0].i_sh - 0.11822).abs() < 1e-12);

        let selfc = period_cashflow(
            &one_hour_dispatch(2.0, 0.0, 0.0),
            &rates(0.195, 0.075, 0.0),
            1.0,
        )
        .unwrap();
        assert!((selfc[0].r_self - 0.39).abs() < 1e-12);
    }

    #[test]
    fn negative_flow_rejected() {
        let d = one_hour_dispatch(0.0, -1.0, 0.0);
        assert!(matches!(
            period_cashflow(&d, &rates(0.2, 0.1, 0.1), 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn distribution_examples() {
        let z = distribution_factors(&[vec![100.0], vec![300.0]], 1.0).unwrap();
        assert_eq!(z, vec![0.25, 0.75]);
        let z = distribution_factors(&[vec![2.0, 3.0], vec![1.0, 4.0]], 1.0).unwrap();
        assert_eq!(z, vec![0.5, 0.5]);
        assert!(matches!(
            distribution_factors(&[vec![0.0], vec![0.0]], 1.0),
            Err(Error::DegenerateDemand)
        ));
    }

    #[test]
    fn npv_examples() {
        let pv = PvSpec::default();
        let bess = BessSpec::default();
        let t = npv_trajectory(
            &CashFlowComponents::default(),
            0,
            0,
            &pv,
            &bess,
            &econ(0.03),
            0.5,
        )
        .unwrap();
        assert_eq!(t.npv_by_year.len(), 26);
        assert!(t.npv_by_year.iter().all(|&v| v == 0.0));

        let ledger = CashFlowLedger {
            investment: vec![1000.0, 0.0],
            operating: vec![0.0, 1100.0],
        };
        let npv = discounted_cumulative(&ledger, 0.1).unwrap();
        assert!(npv[1].abs() < 1e-9);
        assert!(discounted_cumulative(&ledger, -0.01).is_err());
    }

    #[test]
    fn annualisation_uses_season_length() {
        // four representative days netting 2, 3, 4 and 1 euro
        let days = [2.0, 3.0, 4.0, 1.0];
        let comp = CashFlowComponents {
            r_sell: days.iter().sum(),
            r_self: 0.0,
            i_sh: 0.0,
        };
        let e = EconomicParams {
            discount_rate: 0.0,
            horizon_years: 1,
            ..EconomicParams::default()
        };
        let t = npv_trajectory(
            &comp,
            0,
            0,
            &PvSpec::default(),
            &BessSpec::default(),
            &e,
            0.0,
        )
        .unwrap();
        assert!((t.npv_by_year[0] - 910.0).abs() < 1e-9);
    }

    #[test]
    fn payback_examples() {
        assert_eq!(payback(&[-5.0, -1.0, 2.0, 3.0]), Some(2));
        assert_eq!(payback(&[-5.0, 1.0, -1.0, 2.0]), Some(3));
        assert_eq!(payback(&[-5.0, -1.0, -2.0]), None);
        assert_eq!(payback(&[0.0, 1.0]), Some(0));
    }

    #[test]
    fn net_profit_examples() {
        let tr = |v: f64| NpvTrajectory {
            npv_by_year: vec![-1.0, v],
            payback: None,
        };
        assert_eq!(net_profit(&[tr(0.0), tr(0.0)]), 0.0);
        assert_eq!(net_profit(&[tr(100.0), tr(-30.0)]), 70.0);
        assert_eq!(net_profit(&[tr(12.5)]), 12.5);
    }

    #[test]
    fn bill_examples() {
        let zero = CashFlowComponents::default();
        assert_eq!(bill_after(1000.0, &zero, 0.3, 91.0), 1000.0);
        let two = CashFlowComponents {
            r_sell: 1.0,
            r_self: 0.5,
            i_sh: 1.0,
        };
        assert!((bill_after(1000.0, &two, 0.5, 91.0) - 818.0).abs() < 1e-9);
    }

    #[test]
    fn replacement_dip() {
        let pv = PvSpec::default();
        let bess = BessSpec::default();
        let e = econ(0.03);
        let comp = CashFlowComponents {
            r_sell: 5.0,
            r_self: 8.0,
            i_sh: 2.0,
        };
        let t = npv_trajectory(&comp, 10, 2, &pv, &bess, &e, 0.4).unwrap();
        let operating = e.season_days * comp.participant_income(0.4)
            - pv_costs(10, &pv).omca_eur_per_year
            - bess_costs(2, &bess).omca_eur_per_year;
        let d = e.discount(12);
        let step = t.npv_by_year[12] - t.npv_by_year[11];
        assert!((operating * d - step - 2.0 * bess.unit_cost_eur() * d).abs() < 1e-9);
        let step13 = t.npv_by_year[13] - t.npv_by_year[12];
        assert!((step13 - operating * e.discount(13)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn zeta_sums_to_one_and_is_scale_free(
            d in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 8), 1..6),
            scale in 0.01f64..100.0,
        ) {
            prop_assume!(d.iter().flatten().sum::<f64>() > 1e-6);
            let z = distribution_factors(&d, 1.0).unwrap();
            prop_assert!((z.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let scaled: Vec<Vec<f64>> = d.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect();
            let zs = distribution_factors(&scaled, 1.0).unwrap();
            for (a, b) in z.iter().zip(&zs) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn zero_rate_is_plain_cumulative_sum(
            inv in prop::collection::vec(0.0f64..1000.0, 2..30),
            op in -200.0f64..500.0,
        ) {
            let ledger = CashFlowLedger { operating: vec![op; inv.len()], investment: inv.clone() };
            let npv = discounted_cumulative(&ledger, 0.0).unwrap();
            let mut acc = 0.0;
            for (y, v) in npv.iter().enumerate() {
                acc += op - inv[y];
                prop_assert!((v - acc).abs() <= 1e-9 * (1.0 + acc.abs()));
            }
        }

        #[test]
        fn npv_nondecreasing_without_investment(
            op in prop::collection::vec(0.0f64..1000.0, 1..30),
            r in 0.0f64..0.2,
        ) {
            let ledger = CashFlowLedger { investment: vec![0.0; op.len()], operating: op };
            let npv = discounted_cumulative(&ledger, r).unwrap();
            prop_assert!(npv.windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn bill_reduction_is_linear(c in 0.0f64..100.0, s in 0.0f64..5.0) {
            let comp = CashFlowComponents { r_sell: 1.5, r_self: 2.0, i_sh: 0.7 };
            let scaled = CashFlowComponents { r_sell: 1.5 * c, r_self: 2.0 * c, i_sh: 0.7 * c };
            let base = 1000.0 - bill_after(1000.0, &comp, s / 5.0, 91.0);
            let red = 1000.0 - bill_after(1000.0, &scaled, s / 5.0, 91.0);
            prop_assert!((red - c * base).abs() <= 1e-9 * (1.0 + red.abs()));
        }
    }
}
