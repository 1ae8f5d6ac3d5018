//! Hourly flows of a periodic multi-day dispatch.

use serde::{Deserialize, Serialize};

/// Flows of one participant. Powers are in kW, the state of charge in kWh.
///
/// `soc` has one more entry than the power series: `soc[t]` is the state
/// at the start of hour `t` and the last entry the state after the final
/// hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantDispatch {
    pub p_self: Vec<f64>,
    pub p_sell: Vec<f64>,
    pub p_charge: Vec<f64>,
    pub p_discharge: Vec<f64>,
    pub soc: Vec<f64>,
    pub b_charge: Vec<bool>,
    pub b_discharge: Vec<bool>,
}

impl ParticipantDispatch {
    pub fn idle(hours: usize, soc: f64) -> Self {
        ParticipantDispatch {
            p_self: vec![0.0; hours],
            p_sell: vec![0.0; hours],
            p_charge: vec![0.0; hours],
            p_discharge: vec![0.0; hours],
            soc: vec![soc; hours + 1],
            b_charge: vec![false; hours],
            b_discharge: vec![false; hours],
        }
    }

    pub fn hours(&self) -> usize {
        self.p_self.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub dt_hours: f64,
    /// Samples per periodic day.
    pub day_len: usize,
    pub participants: Vec<ParticipantDispatch>,
    /// Community-level shared power.
    pub p_share: Vec<f64>,
}

impl DispatchSolution {
    pub fn hours(&self) -> usize {
        self.p_share.len()
    }

    pub fn days(&self) -> usize {
        self.hours().checked_div(self.day_len).unwrap_or(0)
    }
}
