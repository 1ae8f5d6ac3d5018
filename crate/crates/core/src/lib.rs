//! Techno-economic sizing of rooftop PV arrays and battery storage for the
//! participants of a renewable energy community.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`signal`] reduces a year of hourly load to four representative
//!    seasonal days (log transform, detrending, Fourier regression fitted
//!    with a LASSO penalty through FISTA).
//! 2. [`sizing`] assembles the periodic four-day sizing problem as a
//!    mixed-integer linear program and solves it with branch-and-bound on
//!    top of the sparse revised simplex in [`lp`].
//! 3. [`economics`] turns a dispatch into cash flows, NPV trajectories,
//!    payback periods and post-community electricity bills.
//!
//! [`pv`], [`bess`] and [`tariff`] hold the component models shared by
//! all three stages, [`types`] the validated configuration.

pub mod bess;
pub mod config;
pub mod dispatch;
pub mod economics;
pub mod error;
pub mod lp;
pub mod pv;
pub mod report;
pub mod schema;
pub mod series;
pub mod signal;
pub mod sizing;
pub mod synth;
pub mod tariff;
pub mod types;

pub use error::{Error, Result};
