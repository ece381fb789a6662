//! Triplet sampler built on the KL expansion of the OU bridge.
//!
//! Each path consumes `L + 5` standard normals: `Z_0` for the terminal value,
//! `Z_1..Z_L` for the explicit sine terms and `W_1..W_4` for the truncated
//! tail. `σ_T` and `U` are exact for every `L`; `V` carries one approximation,
//! the moment-matched chi-square stand-in for `R_L`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ou_analytics::{
    bridge_square_mean, convert_triplet, cross_coefficient, phi, terminal_std, ModelParams, Triplet,
};
use crate::series_tails::{b0, SeriesTail};

/// Random inputs of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawBlock {
    pub z0: f64,
    pub z: Vec<f64>,
    pub w: [f64; 4],
}

impl DrawBlock {
    pub fn zeros(l_terms: usize) -> Self {
        Self {
            z0: 0.0,
            z: vec![0.0; l_terms],
            w: [0.0; 4],
        }
    }

    /// Refills in the order `Z_0, Z_1..Z_L, W_1..W_4`.
    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.z0 = rng.sample(StandardNormal);
        for z in self.z.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        for w in self.w.iter_mut() {
            *w = rng.sample(StandardNormal);
        }
    }

    /// Antithetic partner: every draw negated.
    pub fn negate(&mut self) {
        self.z0 = -self.z0;
        self.z.iter_mut().for_each(|z| *z = -*z);
        self.w.iter_mut().for_each(|w| *w = -*w);
    }
}

/// Realised truncated terms `(G_L, P_L, Q_L, R_L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSample {
    pub g_l: f64,
    pub p_l: f64,
    pub q_l: f64,
    pub r_l: f64,
}

impl TailSample {
    /// The tail's exact value when every `Z_n` with `n > L` is zero:
    /// `G = P = Q = 0` and `R_L = −b_L`. The resulting triplet is then the
    /// exact time average of the `L`-term sine path.
    pub fn vanishing(tail: &SeriesTail) -> Self {
        Self {
            g_l: 0.0,
            p_l: 0.0,
            q_l: 0.0,
            r_l: -tail.full_b,
        }
    }
}

/// Maps four independent normals to the tail terms: `(G, P, Q)` from their
/// exact Gaussian law, `R` moment-matched as `sqrt(c_L)(W_4² − 1)`.
#[inline]
pub fn sample_tail(w: &[f64; 4], tail: &SeriesTail) -> TailSample {
    let rho = tail.rho_l;
    TailSample {
        g_l: tail.odd_f.sqrt() * ((1.0 - rho * rho).sqrt() * w[0] + rho * w[1]),
        p_l: tail.odd_g.sqrt() * w[1],
        q_l: tail.even_g.sqrt() * w[2],
        r_l: tail.full_c.sqrt() * (w[3] * w[3] - 1.0),
    }
}

/// A sampled triplet and whether `V` had to be floored at `U²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampled {
    pub triplet: Triplet,
    pub floored: bool,
}

/// Samples one triplet. Builds a [`TripletSampler`] per call; use the sampler
/// directly in loops.
pub fn sample_triplet(d: &DrawBlock, p: &ModelParams, t: f64, tail: &SeriesTail) -> Result<Sampled> {
    TripletSampler::new(*p, t, tail.clone())?.sample(d)
}

/// Per-`(params, T, L)` constants so each path is an `O(L)` dot product.
#[derive(Debug, Clone)]
pub struct TripletSampler {
    params: ModelParams,
    t: f64,
    tail: SeriesTail,
    sigma_bar0: f64,
    decay: f64,
    sigma_hat_std: f64,
    u_level: f64,
    u_bridge: f64,
    v_initial: f64,
    v_bridge: f64,
    v_cross: f64,
    v_noise_mean: f64,
    xi_sqrt_t: f64,
    half_xi2_t: f64,
}

impl TripletSampler {
    pub fn new(params: ModelParams, t: f64, tail: SeriesTail) -> Result<Self> {
        params.validate()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!("maturity must be positive, got {t}")));
        }
        let lambda = params.kappa * t;
        if (tail.lambda - lambda).abs() > 1e-12 * lambda.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "series tail built for lambda = {}, expected kappa*T = {lambda}",
                tail.lambda
            )));
        }
        let sigma_bar0 = params.sigma_bar0();
        let xi = params.xi;
        let phi_l = phi(lambda);
        Ok(Self {
            sigma_bar0,
            decay: (-lambda).exp(),
            sigma_hat_std: terminal_std(lambda, xi, t),
            u_level: sigma_bar0 * phi_l,
            u_bridge: phi_l / (1.0 + (-lambda).exp()),
            v_initial: sigma_bar0 * sigma_bar0 * phi(2.0 * lambda),
            v_bridge: bridge_square_mean(lambda),
            v_cross: sigma_bar0 * cross_coefficient(lambda),
            v_noise_mean: 0.5 * xi * xi * t * b0(lambda),
            xi_sqrt_t: xi * t.sqrt(),
            half_xi2_t: 0.5 * xi * xi * t,
            params,
            t,
            tail,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn maturity(&self) -> f64 {
        self.t
    }

    pub fn tail(&self) -> &SeriesTail {
        &self.tail
    }

    pub fn l_terms(&self) -> usize {
        self.tail.l_terms
    }

    /// Samples the triplet for `d`, whose sine draws must number `L`.
    pub fn sample(&self, d: &DrawBlock) -> Result<Sampled> {
        if d.z.len() != self.tail.l_terms {
            return Err(Error::DrawLength {
                expected: self.tail.l_terms,
                got: d.z.len(),
            });
        }
        Ok(self.sample_unchecked(d))
    }

    #[inline]
    pub(crate) fn sample_unchecked(&self, d: &DrawBlock) -> Sampled {
        self.sample_with_tail(d.z0, &d.z, &sample_tail(&d.w, &self.tail))
    }

    /// Centered terminal value `σ̂_T` for draw `z0`.
    #[inline]
    pub fn sigma_hat(&self, z0: f64) -> f64 {
        self.sigma_hat_std * z0
    }

    /// Triplet for explicit sine draws `z` (length `L`) and a given tail realisation.
    pub fn sample_with_tail(&self, z0: f64, z: &[f64], tail: &TailSample) -> Sampled {
        let c = &self.tail;
        let mut dot_u = 0.0;
        let mut dot_v = 0.0;
        let mut dot_alt = 0.0;
        let mut dot_sq = 0.0;
        for (i, &zn) in z.iter().enumerate() {
            dot_u += c.u_coef[i] * zn;
            dot_v += c.v_coef[i] * zn;
            dot_alt += c.v_alt_coef[i] * zn;
            dot_sq += c.sq_coef[i] * (zn * zn - 1.0);
        }

        let sigma_hat = self.sigma_hat_std * z0;
        let sigma_bar_t = self.sigma_bar0 * self.decay + sigma_hat;

        let u_bar = self.u_level + sigma_hat * self.u_bridge + 2.0 * self.xi_sqrt_t * (dot_u + tail.g_l);

        let v_mean = self.v_initial
            + sigma_hat * sigma_hat * self.v_bridge
            + self.v_noise_mean
            + sigma_hat * self.v_cross;
        let v_linear = self.xi_sqrt_t
            * (self.sigma_bar0 * (dot_v + tail.p_l + tail.q_l)
                + sigma_bar_t * (dot_alt + tail.p_l - tail.q_l));
        let v_bar = v_mean + v_linear + self.half_xi2_t * (dot_sq + tail.r_l);

        let mut triplet = convert_triplet(sigma_bar_t, u_bar, v_bar, self.params.theta);
        let floor = triplet.u_avg * triplet.u_avg;
        let floored = triplet.v_avg < floor;
        if floored {
            triplet.v_avg = floor;
        }
        Sampled { triplet, floored }
    }
}
