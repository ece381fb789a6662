//! Time-stepping baseline.
//!
//! `σ` advances with its exact Gaussian OU transition; `log S` takes a
//! log-Euler step using the left-point volatility, driven by the same normal
//! as the volatility step (correlation `ρ`) plus an independent one. All
//! discretisation bias is therefore in the asset leg.

use crate::error::{Error, Result};
use crate::ou_analytics::{phi, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerScheme {
    LogEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerConfig {
    pub n_steps: usize,
    pub scheme: EulerScheme,
}

impl EulerConfig {
    pub fn new(n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig("Euler scheme needs at least one step".into()));
        }
        Ok(Self {
            n_steps,
            scheme: EulerScheme::LogEuler,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerTerminal {
    pub s_t: f64,
    pub sigma_t: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EulerStepper {
    params: ModelParams,
    n_steps: usize,
    dt: f64,
    sqrt_dt: f64,
    decay: f64,
    vol_step_std: f64,
    rho_bar: f64,
}

impl EulerStepper {
    pub fn new(params: ModelParams, t: f64, cfg: EulerConfig) -> Result<Self> {
        params.validate()?;
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!("maturity must be positive, got {t}")));
        }
        if cfg.n_steps == 0 {
            return Err(Error::InvalidConfig("Euler scheme needs at least one step".into()));
        }
        let dt = t / cfg.n_steps as f64;
        let kdt = params.kappa * dt;
        Ok(Self {
            n_steps: cfg.n_steps,
            dt,
            sqrt_dt: dt.sqrt(),
            decay: (-kdt).exp(),
            vol_step_std: params.xi * (dt * phi(2.0 * kdt)).sqrt(),
            rho_bar: (1.0 - params.rho * params.rho).sqrt(),
            params,
        })
    }

    pub fn n_draws(&self) -> usize {
        2 * self.n_steps
    }

    /// Terminal `(S_T, σ_T)` from `2·n_steps` normals, consumed in pairs
    /// `(vol driver, independent asset driver)` per step.
    pub fn simulate(&self, draws: &[f64]) -> Result<EulerTerminal> {
        if draws.len() != self.n_draws() {
            return Err(Error::DrawLength {
                expected: self.n_draws(),
                got: draws.len(),
            });
        }
        let p = &self.params;
        let mut log_s = p.s0.ln();
        let mut sigma = p.sigma0;
        for pair in draws.chunks_exact(2) {
            let (z1, z2) = (pair[0], pair[1]);
            log_s += (p.r - 0.5 * sigma * sigma) * self.dt
                + sigma * self.sqrt_dt * (p.rho * z1 + self.rho_bar * z2);
            sigma = p.theta + (sigma - p.theta) * self.decay + self.vol_step_std * z1;
        }
        Ok(EulerTerminal {
            s_t: log_s.exp(),
            sigma_t: sigma,
        })
    }
}

pub fn simulate_euler(p: &ModelParams, t: f64, cfg: EulerConfig, draws: &[f64]) -> Result<EulerTerminal> {
    EulerStepper::new(*p, t, cfg)?.simulate(draws)
}
