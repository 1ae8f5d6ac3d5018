use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Harmonic counts and periods (hours) of the Fourier regressors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorSpec {
    pub n_yearly: usize,
    pub n_weekly: usize,
    /// Extra daily harmonics appended as plain columns; 0 disables them.
    pub n_daily: usize,
    pub yearly_period_h: f64,
    pub weekly_period_h: f64,
    pub daily_period_h: f64,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        RegressorSpec {
            n_yearly: 2,
            n_weekly: 3,
            n_daily: 4,
            yearly_period_h: 8760.0,
            weekly_period_h: 168.0,
            daily_period_h: 24.0,
        }
    }
}

impl RegressorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_yearly == 0 || self.n_weekly == 0 {
            return Err(Error::domain(
                "yearly and weekly harmonic counts must be at least 1",
            ));
        }
        for p in [
            self.yearly_period_h,
            self.weekly_period_h,
            self.daily_period_h,
        ] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::domain(format!(
                    "regressor period must be positive, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Columns of the yearly × weekly product set.
    pub fn interaction_columns(&self) -> usize {
        2 * self.n_weekly * (1 + 2 * self.n_yearly)
    }

    pub fn columns(&self) -> usize {
        self.interaction_columns() + 2 * self.n_daily
    }

    /// All regressors evaluated at `t` hours, in column order.
    pub fn row(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        let psi = TAU / self.yearly_period_h;
        let omega = TAU / self.weekly_period_h;
        let yearly = (0..=self.n_yearly)
            .map(|j| (j as f64 * psi * t).cos())
            .chain((1..=self.n_yearly).map(|j| (j as f64 * psi * t).sin()));
        let weekly: Vec<f64> = (0..=self.n_weekly)
            .map(|k| (k as f64 * omega * t).cos())
            .chain((1..self.n_weekly).map(|k| (k as f64 * omega * t).sin()))
            .collect();
        for y in yearly {
            out.extend(weekly.iter().map(|w| y * w));
        }
        let delta = TAU / self.daily_period_h;
        for k in 1..=self.n_daily {
            let a = k as f64 * delta * t;
            out.push(a.cos());
            out.push(a.sin());
        }
    }
}

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Structure(
                "design rows have different lengths".into(),
            ));
        }
        Ok(Design {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    /// `Φ θ`.
    pub fn mul(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Φᵀ v`.
    pub fn t_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `ΦᵀΦ`, row-major `cols × cols`.
    pub fn gram(&self) -> Vec<f64> {
        let m = self.cols;
        let mut g = vec![0.0; m * m];
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..m {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..m {
                    g[a * m + b] += ra * r[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                g[a * m + b] = g[b * m + a];
            }
        }
        g
    }

    pub fn select_rows(&self, keep: impl Iterator<Item = usize>) -> Design {
        let mut data = Vec::new();
        let mut rows = 0;
        for i in keep {
            data.extend_from_slice(self.row(i));
            rows += 1;
        }
        Design {
            rows,
            cols: self.cols,
            data,
        }
    }
}

/// Regressors sampled at `n_samples` instants `t = i · step_hours`.
pub fn build_regressors(n_samples: usize, step_hours: f64, spec: &RegressorSpec) -> Result<Design> {
    spec.validate()?;
    let mut data = Vec::with_capacity(n_samples * spec.columns());
    let mut row = Vec::with_capacity(spec.columns());
    for i in 0..n_samples {
        spec.row(i as f64 * step_hours, &mut row);
        data.extend_from_slice(&row);
    }
    Ok(Design {
        rows: n_samples,
        cols: spec.columns(),
        data,
    })
}
