//! Closed-form quantities of the OU volatility process.
//!
//! Notation: `λ = κT`, `σ̄_t = σ_t − θ`, and `σ̂_T = σ̄_T − σ̄_0 e^{−λ}` is the
//! centered terminal value. Everything is stored as a time *average*
//! (`U = (1/T)∫σ dt`, `V = (1/T)∫σ² dt`), never as an integral.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series_tails;

/// Parameters of the OUSV model. The horizon `T` is passed separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub s0: f64,
    pub sigma0: f64,
    pub theta: f64,
    pub kappa: f64,
    pub xi: f64,
    pub rho: f64,
    pub r: f64,
}

impl ModelParams {
    pub fn new(s0: f64, sigma0: f64, theta: f64, kappa: f64, xi: f64, rho: f64, r: f64) -> Result<Self> {
        let p = Self {
            s0,
            sigma0,
            theta,
            kappa,
            xi,
            rho,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    /// The benchmark set used throughout the experiments:
    /// `S0 = K = 100, σ0 = θ = 0.2, κ = 4, ξ = 0.1, ρ = −0.7, r = 0.09531`.
    pub fn benchmark() -> Self {
        Self {
            s0: 100.0,
            sigma0: 0.2,
            theta: 0.2,
            kappa: 4.0,
            xi: 0.1,
            rho: -0.7,
            r: 0.09531,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.s0, self.sigma0, self.theta, self.kappa, self.xi, self.rho, self.r];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.s0 <= 0.0 {
            return Err(Error::InvalidParams(format!("s0 must be positive, got {}", self.s0)));
        }
        if self.xi <= 0.0 {
            return Err(Error::InvalidParams(format!("xi must be positive, got {}", self.xi)));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// `σ̄_0 = σ_0 − θ`.
    #[inline]
    pub fn sigma_bar0(&self) -> f64 {
        self.sigma0 - self.theta
    }
}

/// One sample of the sufficient statistics `(σ_T, U_{0,T}, V_{0,T})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub sigma_t: f64,
    pub u_avg: f64,
    pub v_avg: f64,
}

impl Triplet {
    /// Inverse of [`convert_triplet`]: returns `(σ̄_T, Ū, V̄)`.
    pub fn to_centered(&self, theta: f64) -> (f64, f64, f64) {
        let u_bar = self.u_avg - theta;
        (self.sigma_t - theta, u_bar, self.v_avg - theta * theta - 2.0 * theta * u_bar)
    }
}

/// Pair of (conditional or unconditional) means of `U` and `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondMoments {
    pub mean_u: f64,
    pub mean_v: f64,
}

/// `φ(x) = (1 − e^{−x}) / x`, with `φ(0) = 1`.
#[inline]
pub fn phi(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `h(x) = (e^{−x} − 1 + x) / x²`, with `h(0) = 1/2`. Equals `(1 − φ(x)) / x`.
pub fn phi2(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ_k (−x)^k / (k+2)!
        let mut term: f64 = 0.5;
        let mut acc: f64 = 0.0;
        let mut k = 0.0;
        while term.abs() > 1e-18 * acc.abs().max(1e-300) || k < 1.0 {
            acc += term;
            k += 1.0;
            term *= -x / (k + 2.0);
        }
        acc
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// KL weight `a_n = sqrt(2 / (λ² + (nπ)²))`.
#[inline]
pub fn kl_coeff(n: usize, lambda: f64) -> f64 {
    debug_assert!(n >= 1);
    let npi = n as f64 * PI;
    (2.0 / (lambda * lambda + npi * npi)).sqrt()
}

/// Centered terminal volatility `σ̂_T = ξ sqrt(T φ(2λ)) z0`.
#[inline]
pub fn sample_terminal_std(z0: f64, lambda: f64, xi: f64, t: f64) -> f64 {
    terminal_std(lambda, xi, t) * z0
}

/// Standard deviation of `σ̂_T`.
#[inline]
pub fn terminal_std(lambda: f64, xi: f64, t: f64) -> f64 {
    xi * (t * phi(2.0 * lambda)).sqrt()
}

/// `E(Ū | σ̂_T) = [σ̄0 + σ̂_T / (1 + e^{−λ})] φ(λ)`.
#[inline]
pub fn cond_mean_u(sigma_bar0: f64, sigma_hat_t: f64, lambda: f64) -> f64 {
    (sigma_bar0 + sigma_hat_t / (1.0 + (-lambda).exp())) * phi(lambda)
}

/// `∫₀¹ (sinh(λx)/sinh λ)² dx = (sinh 2λ − 2λ) / (4λ sinh² λ)`, which is `1/3` at `λ = 0`.
pub fn bridge_square_mean(lambda: f64) -> f64 {
    if lambda < 1.0 {
        // (sinh 2λ − 2λ)/λ³ = Σ_{k≥1} 2^{2k+1} λ^{2k−2} / (2k+1)!
        let x2 = lambda * lambda;
        let mut term = 8.0 / 6.0;
        let mut acc = 0.0;
        let mut k = 1.0;
        while term > 1e-18 * acc || k < 2.0 {
            acc += term;
            term *= 4.0 * x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            k += 1.0;
        }
        let sinhc = if lambda == 0.0 { 1.0 } else { lambda.sinh() / lambda };
        acc / (4.0 * sinhc * sinhc)
    } else {
        let sh = lambda.sinh();
        1.0 / (2.0 * lambda * lambda.tanh()) - 0.5 / (sh * sh)
    }
}

/// Coefficient of `σ̄0 σ̂_T` in `E(V̄ | σ̂_T)`:
/// `(e^{−λ}/λ)(1/φ(2λ) − 1) = 2 e^{−λ} h(2λ) / φ(2λ)`, equal to 1 at `λ = 0`.
#[inline]
pub fn cross_coefficient(lambda: f64) -> f64 {
    2.0 * (-lambda).exp() * phi2(2.0 * lambda) / phi(2.0 * lambda)
}

/// `E(V̄ | σ̂_T)`: the four-term conditional mean of the centered variance average.
pub fn cond_mean_v(sigma_bar0: f64, sigma_hat_t: f64, lambda: f64, xi: f64, t: f64) -> f64 {
    sigma_bar0 * sigma_bar0 * phi(2.0 * lambda)
        + sigma_hat_t * sigma_hat_t * bridge_square_mean(lambda)
        + 0.5 * xi * xi * t * series_tails::b0(lambda)
        + sigma_bar0 * sigma_hat_t * cross_coefficient(lambda)
}

/// Unconditional `E(U_{0,T})` and `E(V_{0,T})`; the latter is the fair strike
/// of a continuous variance swap.
pub fn uncond_means(p: &ModelParams, t: f64) -> CondMoments {
    let lambda = p.kappa * t;
    let d = p.sigma_bar0();
    let phi1 = phi(lambda);
    let phi_two = phi(2.0 * lambda);
    let mean_u = p.theta + d * phi1;
    // ξ²/2κ (1 − φ(2κT)) = ξ² T h(2κT), finite as κ → 0.
    let mean_v = p.theta * p.theta
        + 2.0 * p.theta * d * phi1
        + d * d * phi_two
        + p.xi * p.xi * t * phi2(2.0 * lambda);
    CondMoments { mean_u, mean_v }
}

/// `(σ̄_T, Ū, V̄) → (σ_T, U, V)`.
#[inline]
pub fn convert_triplet(sigma_bar_t: f64, u_bar: f64, v_bar: f64, theta: f64) -> Triplet {
    Triplet {
        sigma_t: theta + sigma_bar_t,
        u_avg: theta + u_bar,
        v_avg: theta * theta + 2.0 * theta * u_bar + v_bar,
    }
}
