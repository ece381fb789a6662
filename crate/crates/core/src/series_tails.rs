//! Closed-form sums of the KL weight series and their truncated tails.
//!
//! With `a_n² = 2 / (λ² + (nπ)²)`:
//!
//! ```text
//! b = Σ a_n²            c = Σ a_n⁴            d = Σ a_n⁶
//! f = Σ a_n² / (nπ)²     g = Σ (nπ)² a_n⁶
//! ```
//!
//! `b0..g0` denote the sums from `n = 1`; a tail with `L` terms removed sums
//! from `n = L + 1`. Each summand is homogeneous in `(λ, nπ)`, so the
//! even-index sum at `λ` is a scaled copy of the full sum at `λ/2`.
//!
//! Below `λ = 2` the closed forms lose most of their digits to cancellation
//! (`λ⁻⁴`, `λ⁻⁶` prefactors), so each sum is evaluated there from its power
//! series in `λ²`, whose coefficients are the zeta values `Σ (nπ)^{−2m}`.
//!
//! A tail that is small next to the full sum would lose the same digits as
//! a difference, so while `λ < (L+1)π/2` it is instead expanded in
//! `λ²/(nπ)²` over Hurwitz zeta tails, which converges at least like `4^{−j}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::ou_analytics::kl_coeff;
use crate::sum::NeumaierSum;

/// Closed forms are used at and above this `λ`; the power series below it.
pub const SERIES_CUTOFF: f64 = 2.0;

const N_SERIES: usize = 80;

/// One of the five KL weight series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    B,
    C,
    D,
    F,
    G,
}

impl Series {
    pub const ALL: [Series; 5] = [Series::B, Series::C, Series::D, Series::F, Series::G];

    pub fn name(self) -> &'static str {
        match self {
            Series::B => "b",
            Series::C => "c",
            Series::D => "d",
            Series::F => "f",
            Series::G => "g",
        }
    }

    /// The `n`-th summand at `λ`.
    #[inline]
    pub fn term(self, n: usize, lambda: f64) -> f64 {
        let npi = n as f64 * PI;
        let a2 = 2.0 / (lambda * lambda + npi * npi);
        match self {
            Series::B => a2,
            Series::C => a2 * a2,
            Series::D => a2 * a2 * a2,
            Series::F => a2 / (npi * npi),
            Series::G => npi * npi * a2 * a2 * a2,
        }
    }

    /// Full sum from `n = 1`.
    pub fn full(self, lambda: f64) -> f64 {
        match self {
            Series::B => b0(lambda),
            Series::C => c0(lambda),
            Series::D => d0(lambda),
            Series::F => f0(lambda),
            Series::G => g0(lambda),
        }
    }

    /// Scale factor mapping `full(λ/2)` to the even-index sum at `λ`.
    fn even_scale(self) -> f64 {
        match self {
            Series::B => 0.25,
            Series::C | Series::F | Series::G => 1.0 / 16.0,
            Series::D => 1.0 / 64.0,
        }
    }
}

/// Which indices a sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    All,
    Odd,
    Even,
}

impl Parity {
    pub const ALL: [Parity; 3] = [Parity::All, Parity::Odd, Parity::Even];

    #[inline]
    pub fn includes(self, n: usize) -> bool {
        match self {
            Parity::All => true,
            Parity::Odd => n % 2 == 1,
            Parity::Even => n % 2 == 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::All => "all",
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

/// `s_m = Σ_{n≥1} (nπ)^{−2m} = ζ(2m) / π^{2m}` for `m = 0..N_SERIES+4`.
fn zeta_moments() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let pi2 = PI * PI;
        // ζ(2) .. ζ(10) exactly
        let exact = [
            f64::NAN,
            1.0 / 6.0,
            1.0 / 90.0,
            1.0 / 945.0,
            1.0 / 9450.0,
            1.0 / 93555.0,
        ];
        (0..N_SERIES + 5)
            .map(|m| {
                if m < exact.len() {
                    exact[m]
                } else {
                    let s = 2.0 * m as f64;
                    let n_direct = 30usize;
                    let mut acc = NeumaierSum::new();
                    for n in (1..n_direct).rev() {
                        acc.add((n as f64).powf(-s));
                    }
                    let nf = n_direct as f64;
                    // Euler–Maclaurin remainder from N onward
                    acc.add(nf.powf(1.0 - s) / (s - 1.0));
                    acc.add(0.5 * nf.powf(-s));
                    acc.add(s / 12.0 * nf.powf(-s - 1.0));
                    acc.sum() / pi2.powi(m as i32)
                }
            })
            .collect()
    })
}

/// Sums `Σ_k (−λ²)^k w(k) s_{k+shift}`.
fn power_series(lambda: f64, shift: usize, weight: impl Fn(f64) -> f64) -> f64 {
    let s = zeta_moments();
    let x = -lambda * lambda;
    let mut xk = 1.0;
    let mut acc = 0.0;
    for k in 0..N_SERIES {
        let term = xk * weight(k as f64) * s[k + shift];
        acc += term;
        if term.abs() < 1e-19 * acc.abs() {
            break;
        }
        xk *= x;
    }
    acc
}

/// `b0(λ) = Σ 2/(λ² + (nπ)²) = (λ coth λ − 1)/λ²`, with `b0(0) = 1/3`.
pub fn b0(lambda: f64) -> f64 {
    if lambda < SERIES_CUTOFF {
        2.0 * power_series(lambda, 1, |_| 1.0)
    } else {
        (lambda / lambda.tanh() - 1.0) / (lambda * lambda)
    }
}

/// `c0(λ) = Σ a_n⁴ = [λ/tanh λ + λ²/sinh²λ − 2] / λ⁴`, with `c0(0) = 2/45`.
pub fn c0(lambda: f64) -> f64 {
    if lambda < SERIES_CUTOFF {
        4.0 * power_series(lambda, 2, |k| k + 1.0)
    } else {
        let sh = lambda.sinh();
        let l2 = lambda * lambda;
        (lambda / lambda.tanh() + l2 / (sh * sh) - 2.0) / (l2 * l2)
    }
}

/// `d0(λ) = Σ a_n⁶ = [3λ/tanh λ + λ²(3 + 2λ/tanh λ)/sinh²λ − 8] / (2λ⁶)`, with `d0(0) = 8/945`.
pub fn d0(lambda: f64) -> f64 {
    if lambda < SERIES_CUTOFF {
        8.0 * power_series(lambda, 3, |k| 0.5 * (k + 1.0) * (k + 2.0))
    } else {
        let sh = lambda.sinh();
        let l2 = lambda * lambda;
        let lcoth = lambda / lambda.tanh();
        (3.0 * lcoth + l2 * (3.0 + 2.0 * lcoth) / (sh * sh) - 8.0) / (2.0 * l2 * l2 * l2)
    }
}

/// `f0(λ) = Σ a_n²/(nπ)² = (b0(0) − b0(λ))/λ²`, with `f0(0) = 1/45`.
pub fn f0(lambda: f64) -> f64 {
    if lambda < SERIES_CUTOFF {
        2.0 * power_series(lambda, 2, |_| 1.0)
    } else {
        (1.0 / 3.0 - b0(lambda)) / (lambda * lambda)
    }
}

/// `g0(λ) = Σ (nπ)² a_n⁶ = 2 c0(λ) − λ² d0(λ)`, with `g0(0) = 4/45`.
pub fn g0(lambda: f64) -> f64 {
    if lambda < SERIES_CUTOFF {
        8.0 * power_series(lambda, 2, |k| 0.5 * (k + 1.0) * (k + 2.0))
    } else {
        2.0 * c0(lambda) - lambda * lambda * d0(lambda)
    }
}

/// Even-index sum `base(λ/2) · 2^{−degree}` (`1/16` for `c`, `f`, `g`).
pub fn split_even(base: Series, lambda: f64) -> f64 {
    base.full(0.5 * lambda) * base.even_scale()
}

/// Odd-index sum `base(λ) − split_even(base, λ)`.
pub fn split_odd(base: Series, lambda: f64) -> f64 {
    base.full(lambda) - split_even(base, lambda)
}

/// Analytic sum over `parity` from `n = 1`.
pub fn series_sum(series: Series, parity: Parity, lambda: f64) -> f64 {
    match parity {
        Parity::All => series.full(lambda),
        Parity::Odd => split_odd(series, lambda),
        Parity::Even => split_even(series, lambda),
    }
}

/// Compensated partial sum of the first `l_terms` summands restricted to `parity`.
pub fn partial_sum(series: Series, parity: Parity, lambda: f64, l_terms: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    // smallest terms first
    for n in (1..=l_terms).rev().filter(|&n| parity.includes(n)) {
        acc.add(series.term(n, lambda));
    }
    acc.sum()
}

/// Bernoulli numbers `B_2 .. B_16`.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// `q^s ζ(s, q) = Σ_{m≥0} (1 + m/q)^{−s}` by Euler–Maclaurin, for `s > 1`, `q > 0`.
fn hurwitz_scaled(s: f64, q: f64) -> f64 {
    let n_direct = s.ceil().max(12.0) as usize;
    let mut acc = NeumaierSum::new();
    for m in (0..n_direct).rev() {
        acc.add((1.0 + m as f64 / q).powf(-s));
    }
    let big = q + n_direct as f64;
    let r = (1.0 + n_direct as f64 / q).powf(-s);
    let mut rem = NeumaierSum::new();
    rem.add(r * big / (s - 1.0));
    rem.add(0.5 * r);
    // B_{2k}/(2k)! · s(s+1)…(s+2k−2) · big^{−(2k−1)}
    let mut fact = 1.0;
    let mut rising = s;
    let mut pow = big;
    for (i, b) in BERNOULLI.iter().enumerate() {
        let k2 = 2.0 * (i as f64 + 1.0);
        fact *= if i == 0 { 2.0 } else { (k2 - 1.0) * k2 };
        if i > 0 {
            rising *= (s + k2 - 3.0) * (s + k2 - 2.0);
            pow *= big * big;
        }
        rem.add(b / fact * rising * r / pow);
    }
    acc.add(rem.sum());
    acc.sum()
}

/// Summand `2^k (nπ)^{2p} (λ² + (nπ)²)^{−k}` as `(k, p)`.
fn shape(series: Series) -> (i32, i32) {
    match series {
        Series::B => (1, 0),
        Series::C => (2, 0),
        Series::D => (3, 0),
        Series::F => (1, -1),
        Series::G => (3, 1),
    }
}

/// Tail from the expansion `(1 + y)^{−k} = Σ_j C(j+k−1, k−1) (−y)^j`, `y = λ²/(nπ)²`.
fn tail_expansion(series: Series, parity: Parity, lambda: f64, l_terms: usize) -> f64 {
    let (k, p) = shape(series);
    let first = match parity {
        Parity::All => l_terms + 1,
        Parity::Odd | Parity::Even => (l_terms + 1..).find(|&n| parity.includes(n)).unwrap_or(l_terms + 1),
    };
    let step = if parity == Parity::All { 1.0 } else { 2.0 };
    let first_pi = first as f64 * PI;
    let q = first as f64 / step;
    let y = -(lambda / first_pi).powi(2);
    let base = 2f64.powi(k) * first_pi.powi(2 * (p - k));
    let mut acc = NeumaierSum::new();
    let mut yj = 1.0;
    for j in 0..400 {
        let jf = j as f64;
        let binom = match k {
            1 => 1.0,
            2 => jf + 1.0,
            _ => 0.5 * (jf + 1.0) * (jf + 2.0),
        };
        let term = binom * yj * hurwitz_scaled(2.0 * (k - p) as f64 + 2.0 * jf, q);
        acc.add(term);
        if term.abs() < 1e-19 * acc.sum().abs() {
            break;
        }
        yj *= y;
    }
    base * acc.sum()
}

/// Tail `Σ_{n > L, parity} term(n)`: the zeta expansion while it converges
/// quickly, otherwise the analytic sum minus the explicit partial sum.
/// The difference form may come out slightly negative from rounding.
pub fn tail_sum(series: Series, parity: Parity, lambda: f64, l_terms: usize) -> f64 {
    if l_terms > 0 && lambda < 0.5 * (l_terms + 1) as f64 * PI {
        tail_expansion(series, parity, lambda, l_terms)
    } else {
        series_sum(series, parity, lambda) - partial_sum(series, parity, lambda, l_terms)
    }
}

/// Precomputed per-`(λ, L)` data for the triplet sampler: the first `L` KL
/// weights, the dot-product coefficient arrays, and the tail sums that set
/// the law of the truncated terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTail {
    pub lambda: f64,
    pub l_terms: usize,
    /// `a_1 .. a_L`.
    pub a: Vec<f64>,
    /// `ḟ_L`, variance of `G_L`.
    pub odd_f: f64,
    /// `ċ_L`, covariance of `G_L` and `P_L`.
    pub odd_c: f64,
    /// `ġ_L`, variance of `P_L`.
    pub odd_g: f64,
    /// `g̈_L`, variance of `Q_L`.
    pub even_g: f64,
    /// `c_L`; `Var(R_L) = 2 c_L`.
    pub full_c: f64,
    /// `b_L = Σ_{n>L} a_n²`.
    pub full_b: f64,
    /// `ρ_L = ċ_L / sqrt(ḟ_L ġ_L)`.
    pub rho_l: f64,
    /// `a_n / (nπ)` for odd `n`, zero for even `n`.
    pub u_coef: Vec<f64>,
    /// `nπ a_n³`.
    pub v_coef: Vec<f64>,
    /// `(−1)^{n−1} nπ a_n³`.
    pub v_alt_coef: Vec<f64>,
    /// `a_n²`.
    pub sq_coef: Vec<f64>,
}

/// Builds the [`SeriesTail`] for `λ = κT` keeping `l_terms` explicit terms.
pub fn make_tail(lambda: f64, l_terms: usize) -> Result<SeriesTail> {
    if l_terms < 2 || l_terms % 2 != 0 {
        return Err(Error::InvalidTerms(l_terms));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be finite and nonnegative, got {lambda}")));
    }

    let checked = |name: &'static str, series: Series, parity: Parity| -> Result<f64> {
        let full = series_sum(series, parity, lambda);
        let value = tail_sum(series, parity, lambda, l_terms);
        let slack = 64.0 * f64::EPSILON * full;
        if value < -slack {
            return Err(Error::NegativeTail {
                name,
                value,
                lambda,
                l_terms,
            });
        }
        Ok(value.max(0.0))
    };

    let odd_f = checked("odd f", Series::F, Parity::Odd)?;
    let odd_c = checked("odd c", Series::C, Parity::Odd)?;
    let odd_g = checked("odd g", Series::G, Parity::Odd)?;
    let even_g = checked("even g", Series::G, Parity::Even)?;
    let full_c = checked("c", Series::C, Parity::All)?;
    let full_b = checked("b", Series::B, Parity::All)?;

    let denom = (odd_f * odd_g).sqrt();
    let rho_l = if denom > 0.0 { (odd_c / denom).min(1.0) } else { 0.0 };

    let a: Vec<f64> = (1..=l_terms).map(|n| kl_coeff(n, lambda)).collect();
    let mut u_coef = Vec::with_capacity(l_terms);
    let mut v_coef = Vec::with_capacity(l_terms);
    let mut v_alt_coef = Vec::with_capacity(l_terms);
    let mut sq_coef = Vec::with_capacity(l_terms);
    for (i, &an) in a.iter().enumerate() {
        let n = i + 1;
        let npi = n as f64 * PI;
        let odd = n % 2 == 1;
        u_coef.push(if odd { an / npi } else { 0.0 });
        let v = npi * an * an * an;
        v_coef.push(v);
        v_alt_coef.push(if odd { v } else { -v });
        sq_coef.push(an * an);
    }

    Ok(SeriesTail {
        lambda,
        l_terms,
        a,
        odd_f,
        odd_c,
        odd_g,
        even_g,
        full_c,
        full_b,
        rho_l,
        u_coef,
        v_coef,
        v_alt_coef,
        sq_coef,
    })
}

impl SeriesTail {
    /// Covariance matrix of `(G_L, P_L, Q_L)`, row-major.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        [
            [self.odd_f, self.odd_c, 0.0],
            [self.odd_c, self.odd_g, 0.0],
            [0.0, 0.0, self.even_g],
        ]
    }
}
