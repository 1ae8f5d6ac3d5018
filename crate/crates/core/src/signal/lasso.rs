use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::regressors::Design;

/// Proximal operator of `τ|x|`.
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

fn check_dims(phi: &Design, y: &[f64]) -> Result<()> {
    if phi.rows != y.len() {
        return Err(Error::SeriesLengthMismatch {
            what: "design rows vs observations".into(),
            left: phi.rows,
            right: y.len(),
        });
    }
    if phi.rows == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    Ok(())
}

/// `(2/n) max_i |φ_iᵀ y|`: the smallest λ whose LASSO solution is zero.
pub fn lambda_max(phi: &Design, y: &[f64]) -> Result<f64> {
    check_dims(phi, y)?;
    let scale = 2.0 / phi.rows as f64;
    Ok(phi
        .t_mul(y)
        .iter()
        .map(|v| (scale * v).abs())
        .fold(0.0, f64::max))
}

/// `(1/n)‖Φθ − y‖² + λ‖θ‖₁`.
pub fn lasso_objective(phi: &Design, y: &[f64], theta: &[f64], lambda: f64) -> f64 {
    let fit = phi.mul(theta);
    let rss: f64 = fit.iter().zip(y).map(|(f, y)| (f - y) * (f - y)).sum();
    rss / phi.rows as f64 + lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
}

/// Where the proximal step sits relative to the momentum extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FistaOrder {
    /// Prox right after the gradient step, then extrapolation.
    #[default]
    Canonical,
    /// Gradient step, extrapolation with the previous two iterates, then prox.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FistaOptions {
    /// Stop once `‖θ_k − θ_{k−1}‖` falls to this.
    pub tol: f64,
    pub max_iter: usize,
    pub order: FistaOrder,
}

impl Default for FistaOptions {
    fn default() -> Self {
        FistaOptions {
            tol: 1e-8,
            max_iter: 50_000,
            order: FistaOrder::Canonical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FistaResult {
    pub theta: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` ran out first; `theta` is then the best iterate.
    pub converged: bool,
}

/// Largest eigenvalue of a symmetric positive semidefinite `m × m` matrix.
pub fn power_iteration(g: &[f64], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = sym_mul(g, m, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-13 * next.abs() {
            return next.max(norm);
        }
        lambda = next;
    }
    lambda
}

fn sym_mul(g: &[f64], m: usize, v: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|i| {
            g[i * m..(i + 1) * m]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Minimizes `(1/n)‖Φθ − y‖² + λ‖θ‖₁` by accelerated proximal gradient
/// from `θ₀ = 0` with step `1/L`, `L = (2/n) σ_max(Φ)²`.
pub fn fista(phi: &Design, y: &[f64], lambda: f64, opts: &FistaOptions) -> Result<FistaResult> {
    check_dims(phi, y)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if y.iter().chain(&phi.data).any(|v| !v.is_finite()) {
        return Err(Error::domain("design and observations must be finite"));
    }
    let m = phi.cols;
    let scale = 2.0 / phi.rows as f64;
    let gram = phi.gram();
    let rhs = phi.t_mul(y);
    let lf = scale * power_iteration(&gram, m);
    if lf == 0.0 {
        return Ok(FistaResult {
            theta: vec![0.0; m],
            iterations: 0,
            converged: true,
        });
    }
    let step = 1.0 / lf;
    let tau = step * lambda;
    let grad_step = |x: &[f64]| -> Vec<f64> {
        let gx = sym_mul(&gram, m, x);
        x.iter()
            .zip(gx.iter().zip(&rhs))
            .map(|(xi, (g, r))| xi - step * (scale * g - scale * r))
            .collect()
    };

    let mut prev = vec![0.0; m];
    let mut theta = vec![0.0; m];
    let mut point = vec![0.0; m];
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let smooth = |x: &[f64]| -> f64 {
        let gx = sym_mul(&gram, m, x);
        let quad: f64 = x.iter().zip(&gx).map(|(a, b)| a * b).sum();
        let lin: f64 = x.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        (quad - 2.0 * lin + yy) / phi.rows as f64 + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut best = (smooth(&theta), theta.clone());
    let mut t = 1.0f64;
    for k in 1..=opts.max_iter {
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        let next: Vec<f64> = match opts.order {
            FistaOrder::Canonical => grad_step(&point)
                .into_iter()
                .map(|v| soft_threshold(v, tau))
                .collect(),
            FistaOrder::Printed => grad_step(&theta)
                .into_iter()
                .zip(theta.iter().zip(&prev))
                .map(|(g, (a, b))| soft_threshold(g + momentum * (a - b), tau))
                .collect(),
        };
        let moved = next
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if opts.order == FistaOrder::Canonical {
            point = next
                .iter()
                .zip(&theta)
                .map(|(a, b)| a + momentum * (a - b))
                .collect();
        }
        prev = std::mem::replace(&mut theta, next);
        t = t_next;
        if k + 64 > opts.max_iter {
            let f = smooth(&theta);
            if f < best.0 {
                best = (f, theta.clone());
            }
        }
        if moved <= opts.tol {
            return Ok(FistaResult {
                theta,
                iterations: k,
                converged: true,
            });
        }
    }
    if smooth(&theta) <= best.0 {
        best.1 = theta;
    }
    Ok(FistaResult {
        theta: best.1,
        iterations: opts.max_iter,
        converged: false,
    })
}
