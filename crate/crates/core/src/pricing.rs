//! Conditional Black–Scholes pricing from sampled triplets.
//!
//! Given `(σ_T, U, V)`, `log S_T` is normal with total variance
//! `Σ² = (1 − ρ²) T V` around the conditional forward
//!
//! ```text
//! F_T = S0 exp(rT + ρ/(2ξ) [(−ξ² − 2κθU + (2κ − ρξ)V) T + σ_T² − σ0²])
//! ```
//!
//! The control variate rescales every `F_T` by `μ = S0 e^{rT} / mean(F_T)` so
//! the sample forward is exactly the arbitrage-free one.

use crate::error::{Error, Result};
use crate::ou_analytics::{ModelParams, Triplet};
use crate::sum::NeumaierSum;

/// Conditional law of `S_T`: forward and total (not annualised) volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondLaw {
    pub fwd: f64,
    pub sig_total: f64,
}

/// Estimator summary across MC sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceStats {
    pub mean: f64,
    /// `mean − reference`, absent without a reference.
    pub bias: Option<f64>,
    /// Root-mean-square deviation of the set estimates from the reference.
    pub rmse: Option<f64>,
    /// Standard error of `mean` (NaN with a single set).
    pub stderr: f64,
    pub wall_seconds: f64,
    pub n_floor_events: usize,
}

impl PriceStats {
    /// Aggregates per-set estimates against an optional reference value.
    pub fn from_sets(values: &[f64], reference: Option<f64>, wall_seconds: f64, n_floor_events: usize) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().copied().collect::<NeumaierSum>().sum() / n;
        let stderr = if values.len() > 1 {
            let ss: NeumaierSum = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (ss.sum() / (n - 1.0) / n).sqrt()
        } else {
            f64::NAN
        };
        let (bias, rmse) = match reference {
            Some(r) => {
                let ss: NeumaierSum = values.iter().map(|v| (v - r) * (v - r)).collect();
                (Some(mean - r), Some((ss.sum() / n).sqrt()))
            }
            None => (None, None),
        };
        Self {
            mean,
            bias,
            rmse,
            stderr,
            wall_seconds,
            n_floor_events,
        }
    }
}

/// Precomputed map from a triplet to its [`CondLaw`] for fixed `(params, T)`.
#[derive(Debug, Clone, Copy)]
pub struct ForwardMap {
    s0: f64,
    rt: f64,
    lev: f64,
    c_const: f64,
    c_u: f64,
    c_v: f64,
    sig2_coef: f64,
}

impl ForwardMap {
    pub fn new(p: &ModelParams, t: f64) -> Self {
        Self {
            s0: p.s0,
            rt: p.r * t,
            lev: p.rho / (2.0 * p.xi),
            c_const: -p.xi * p.xi * t - p.sigma0 * p.sigma0,
            c_u: -2.0 * p.kappa * p.theta * t,
            c_v: (2.0 * p.kappa - p.rho * p.xi) * t,
            sig2_coef: (1.0 - p.rho * p.rho) * t,
        }
    }

    #[inline]
    pub fn law(&self, tr: &Triplet) -> CondLaw {
        let bracket = self.c_const + self.c_u * tr.u_avg + self.c_v * tr.v_avg + tr.sigma_t * tr.sigma_t;
        CondLaw {
            fwd: self.s0 * (self.rt + self.lev * bracket).exp(),
            sig_total: (self.sig2_coef * tr.v_avg).max(0.0).sqrt(),
        }
    }
}

/// Conditional forward and total volatility of `S_T` given a triplet.
pub fn cond_law(tr: &Triplet, p: &ModelParams, t: f64) -> CondLaw {
    ForwardMap::new(p, t).law(tr)
}

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Undiscounted Black–Scholes call with total volatility `sig_total = σ√T`.
#[inline]
pub fn bs_call(k: f64, f: f64, sig_total: f64) -> f64 {
    if sig_total <= 0.0 {
        return (f - k).max(0.0);
    }
    let d1 = (f / k).ln() / sig_total + 0.5 * sig_total;
    let d2 = d1 - sig_total;
    f * norm_cdf(d1) - k * norm_cdf(d2)
}

/// Undiscounted Black–Scholes put.
#[inline]
pub fn bs_put(k: f64, f: f64, sig_total: f64) -> f64 {
    if sig_total <= 0.0 {
        return (k - f).max(0.0);
    }
    let d1 = (f / k).ln() / sig_total + 0.5 * sig_total;
    let d2 = d1 - sig_total;
    k * norm_cdf(-d2) - f * norm_cdf(-d1)
}

/// Terminal price draw `S_T = F_T exp(Σz − Σ²/2)`.
pub fn sample_spot(tr: &Triplet, z: f64, p: &ModelParams, t: f64) -> f64 {
    let law = cond_law(tr, p, t);
    law.fwd * (law.sig_total * z - 0.5 * law.sig_total * law.sig_total).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// Output of [`price_call`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallEstimate {
    pub price: f64,
    /// `e^{−rT} mean(F_T)`, the implied spot before any correction.
    pub spot_check: f64,
    /// Control-variate multiplier (1 when the control variate is off).
    pub mu: f64,
}

/// Per-set estimator over materialised conditional laws.
#[derive(Debug, Clone, Copy)]
pub struct SetPricer {
    discount: f64,
    forward: f64,
}

impl SetPricer {
    pub fn new(p: &ModelParams, t: f64) -> Self {
        Self {
            discount: (-p.r * t).exp(),
            forward: p.s0 * (p.r * t).exp(),
        }
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// `mean(F_T)`.
    pub fn mean_forward(&self, laws: &[CondLaw]) -> Result<f64> {
        if laws.is_empty() {
            return Err(Error::EmptySample);
        }
        let acc: NeumaierSum = laws.iter().map(|l| l.fwd).collect();
        Ok(acc.sum() / laws.len() as f64)
    }

    /// Control-variate multiplier `μ = S0 e^{rT} / mean(F_T)`.
    pub fn cv_multiplier(&self, laws: &[CondLaw]) -> Result<f64> {
        Ok(self.forward / self.mean_forward(laws)?)
    }

    /// `e^{−rT} mean(BS(K, μ F_T, Σ))`.
    pub fn price(&self, laws: &[CondLaw], k: f64, mu: f64, kind: OptionKind) -> Result<f64> {
        if laws.is_empty() {
            return Err(Error::EmptySample);
        }
        let acc: NeumaierSum = match kind {
            OptionKind::Call => laws.iter().map(|l| bs_call(k, mu * l.fwd, l.sig_total)).collect(),
            OptionKind::Put => laws.iter().map(|l| bs_put(k, mu * l.fwd, l.sig_total)).collect(),
        };
        Ok(self.discount * acc.sum() / laws.len() as f64)
    }

    /// `e^{−rT} mean(μ F_T)`.
    pub fn spot(&self, laws: &[CondLaw], mu: f64) -> Result<f64> {
        let acc: NeumaierSum = laws.iter().map(|l| mu * l.fwd).collect();
        if laws.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(self.discount * acc.sum() / laws.len() as f64)
    }
}

/// Conditional-simulation estimate of a European option from a sample of triplets.
pub fn price_option(
    triplets: &[Triplet],
    k: f64,
    p: &ModelParams,
    t: f64,
    use_cv: bool,
    kind: OptionKind,
) -> Result<CallEstimate> {
    if triplets.is_empty() {
        return Err(Error::EmptySample);
    }
    let map = ForwardMap::new(p, t);
    let laws: Vec<CondLaw> = triplets.iter().map(|tr| map.law(tr)).collect();
    let pricer = SetPricer::new(p, t);
    let mean_fwd = pricer.mean_forward(&laws)?;
    let mu = if use_cv { pricer.forward / mean_fwd } else { 1.0 };
    Ok(CallEstimate {
        price: pricer.price(&laws, k, mu, kind)?,
        spot_check: pricer.discount * mean_fwd,
        mu,
    })
}

/// Call price by averaging conditional Black–Scholes values, optionally with
/// the martingale-preserving forward correction.
pub fn price_call(triplets: &[Triplet], k: f64, p: &ModelParams, t: f64, use_cv: bool) -> Result<CallEstimate> {
    price_option(triplets, k, p, t, use_cv, OptionKind::Call)
}

/// Put counterpart of [`price_call`].
pub fn price_put(triplets: &[Triplet], k: f64, p: &ModelParams, t: f64, use_cv: bool) -> Result<CallEstimate> {
    price_option(triplets, k, p, t, use_cv, OptionKind::Put)
}
