//! Volatility paths rebuilt from the truncated sine series, plus a trapezoid
//! integrator used as an independent check on the analytic `(U, V)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ou_analytics::{kl_coeff, sample_terminal_std, ModelParams};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub t_grid: Vec<f64>,
    pub sigma_vals: Vec<f64>,
    /// Number of sine terms used.
    pub n_terms: usize,
}

/// `sinh(κt)/sinh(κT)`, with the `κ → 0` limit `t/T`.
fn sinh_ratio(kappa: f64, t: f64, horizon: f64) -> f64 {
    let a = kappa * t;
    let b = kappa * horizon;
    if b == 0.0 {
        t / horizon
    } else if b < 1.0 {
        a.sinh() / b.sinh()
    } else {
        // overflow-safe: e^{a−b} (1 − e^{−2a}) / (1 − e^{−2b})
        (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
    }
}

/// Evaluates
/// `σ_t = θ + σ̄0 e^{−κt} + σ̂_T sinh(κt)/sinh(κT) + ξ√T Σ a_n sin(nπt/T) Z_n`
/// on a uniform grid of `n_grid` points over `[0, T]`, using as many sine
/// terms as `z` has entries.
pub fn build_path(z0: f64, z: &[f64], p: &ModelParams, t: f64, n_grid: usize) -> Result<PathGrid> {
    if n_grid < 2 {
        return Err(Error::InvalidConfig(format!("path grid needs at least 2 points, got {n_grid}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("maturity must be positive, got {t}")));
    }
    let lambda = p.kappa * t;
    let sigma_hat = sample_terminal_std(z0, lambda, p.xi, t);
    let sb0 = p.sigma_bar0();
    let scale = p.xi * t.sqrt();
    let weights: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(i, &zn)| scale * kl_coeff(i + 1, lambda) * zn)
        .collect();

    let last = (n_grid - 1) as f64;
    let mut t_grid = Vec::with_capacity(n_grid);
    let mut sigma_vals = Vec::with_capacity(n_grid);
    for i in 0..n_grid {
        let frac = i as f64 / last;
        let ti = if i == n_grid - 1 { t } else { t * frac };
        let bridge: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * ((k + 1) as f64 * PI * frac).sin())
            .sum();
        let s = p.theta + sb0 * (-p.kappa * ti).exp() + sigma_hat * sinh_ratio(p.kappa, ti, t) + bridge;
        t_grid.push(ti);
        sigma_vals.push(s);
    }
    Ok(PathGrid {
        t_grid,
        sigma_vals,
        n_terms: z.len(),
    })
}

/// Trapezoid estimates of `(1/T)∫σ dt` and `(1/T)∫σ² dt`.
pub fn integrate_path(g: &PathGrid) -> Result<(f64, f64)> {
    let n = g.t_grid.len();
    if n < 2 || g.sigma_vals.len() != n {
        return Err(Error::InvalidConfig("path grid needs at least 2 matching points".into()));
    }
    let mut iu = NeumaierSum::new();
    let mut iv = NeumaierSum::new();
    for i in 1..n {
        let h = g.t_grid[i] - g.t_grid[i - 1];
        let (a, b) = (g.sigma_vals[i - 1], g.sigma_vals[i]);
        iu.add(0.5 * h * (a + b));
        iv.add(0.5 * h * (a * a + b * b));
    }
    let span = g.t_grid[n - 1] - g.t_grid[0];
    Ok((iu.sum() / span, iv.sum() / span))
}
