//! Charts drawn from an evaluation report.

use std::collections::BTreeSet;

use rec_sizer::report::Report;

use crate::svg::{BarChart, LineChart, Marker, Series};

pub const MONEY_DECIMALS: usize = 2;
pub const ENERGY_DECIMALS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Line(LineChart),
    Bar(BarChart),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    /// File name without extension.
    pub stem: String,
    pub chart: Chart,
    pub decimals: usize,
}

impl Plot {
    pub fn svg(&self) -> String {
        match &self.chart {
            Chart::Line(c) => c.to_svg(),
            Chart::Bar(c) => c.to_svg(),
        }
    }

    pub fn csv(&self) -> String {
        match &self.chart {
            Chart::Line(c) => c.to_csv(self.decimals),
            Chart::Bar(c) => c.to_csv(self.decimals),
        }
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn day_markers(report: &Report) -> Vec<Marker> {
    report
        .day_names
        .iter()
        .enumerate()
        .map(|(d, name)| Marker {
            x: (d * report.day_len) as f64,
            label: name.clone(),
        })
        .collect()
}

/// Community plots (NPV, bills, incentives, shared power) followed by one
/// dispatch plot per participant.
pub fn plots(report: &Report) -> Vec<Plot> {
    let ids: Vec<String> = report.participants.iter().map(|p| p.id.clone()).collect();
    let years: Vec<f64> = (0..=report.horizon_years).map(f64::from).collect();
    let hours: Vec<f64> = (0..report.hours()).map(|h| h as f64).collect();
    let community: Vec<f64> = (0..years.len())
        .map(|y| report.participants.iter().map(|p| p.npv_by_year[y]).sum())
        .collect();

    let mut npv: Vec<Series> = report
        .participants
        .iter()
        .map(|p| Series::new(p.id.clone(), p.npv_by_year.clone()))
        .collect();
    npv.push(Series::new("community", community));

    let per = |f: fn(&rec_sizer::report::ParticipantReport) -> f64| {
        report.participants.iter().map(f).collect()
    };
    let mut out = vec![
        Plot {
            stem: "npv".into(),
            chart: Chart::Line(LineChart {
                title: "Net present value".into(),
                x_label: "year".into(),
                y_label: "EUR".into(),
                x: years,
                series: npv,
                markers: Vec::new(),
            }),
            decimals: MONEY_DECIMALS,
        },
        Plot {
            stem: "bills".into(),
            chart: Chart::Bar(BarChart {
                title: "Yearly electricity bill".into(),
                y_label: "EUR/year".into(),
                categories: ids.clone(),
                series: vec![
                    Series::new("before", per(|p| p.bill_before_eur)),
                    Series::new("after", per(|p| p.bill_after_eur)),
                ],
            }),
            decimals: MONEY_DECIMALS,
        },
        Plot {
            stem: "incentives".into(),
            chart: Chart::Bar(BarChart {
                title: "Yearly income".into(),
                y_label: "EUR/year".into(),
                categories: ids,
                series: vec![
                    Series::new("sales", per(|p| p.annual_sell_revenue_eur)),
                    Series::new("self-consumption", per(|p| p.annual_self_savings_eur)),
                    Series::new("sharing incentive", per(|p| p.annual_incentive_eur)),
                ],
            }),
            decimals: MONEY_DECIMALS,
        },
        Plot {
            stem: "shared".into(),
            chart: Chart::Line(LineChart {
                title: "Shared power".into(),
                x_label: "hour".into(),
                y_label: "kW".into(),
                x: hours.clone(),
                series: vec![Series::new("shared", report.shared_kw.clone())],
                markers: day_markers(report),
            }),
            decimals: ENERGY_DECIMALS,
        },
    ];

    let mut used = BTreeSet::new();
    for p in &report.participants {
        let base = format!("dispatch_{}", sanitize(&p.id));
        let mut stem = base.clone();
        let mut k = 2;
        while !used.insert(stem.clone()) {
            stem = format!("{base}_{k}");
            k += 1;
        }
        let h = &p.hourly;
        out.push(Plot {
            stem,
            chart: Chart::Line(LineChart {
                title: format!(
                    "Dispatch of {} ({} panels, {} batteries)",
                    p.id, p.n_pv, p.n_bess
                ),
                x_label: "hour".into(),
                y_label: "kW / kWh".into(),
                x: hours.clone(),
                series: vec![
                    Series::new("demand", h.demand_kw.clone()),
                    Series::new("pv", h.pv_kw.clone()),
                    Series::new("self-consumed", h.self_kw.clone()),
                    Series::new("sold", h.sell_kw.clone()),
                    Series::new("charge", h.charge_kw.clone()),
                    Series::new("discharge", h.discharge_kw.clone()),
                    Series::new("soc", h.soc_kwh.clone()),
                ],
                markers: day_markers(report),
            }),
            decimals: ENERGY_DECIMALS,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_are_safe() {
        assert_eq!(sanitize("a/b c"), "a_b_c");
        assert_eq!(sanitize("p-1_x"), "p-1_x");
    }
}
