//! Brute-force verification of the analytic series sums.
//!
//! Each series is summed directly, smallest terms first with compensation,
//! over `n = 1..=n_terms`. The `b` series decays only like `n⁻²`, so its
//! remainder past `n_terms` is added as the integral from `n_terms + 1/2`;
//! the other series decay like `n⁻⁴` or faster and need no correction.

use std::f64::consts::PI;

use crate::series_tails::{tail_sum, Parity, Series};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckEntry {
    pub series: Series,
    pub parity: Parity,
    pub lambda: f64,
    /// Terms removed; 0 for the full sum.
    pub l_terms: usize,
    pub analytic: f64,
    pub brute: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_err).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&CheckEntry> {
        self.entries.iter().max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
    }
}

/// Integral of the `b` summand from `m` to infinity.
fn b_remainder(lambda: f64, m: f64) -> f64 {
    if lambda == 0.0 {
        2.0 / (PI * PI * m)
    } else {
        2.0 / (PI * lambda) * (lambda / (PI * m)).atan()
    }
}

/// Brute-force tails `Σ_{n>L}` for `L = 0..=max_l`, indexed `[series][parity][L]`.
pub fn brute_tails(lambda: f64, n_terms: usize, max_l: usize) -> Vec<Vec<Vec<f64>>> {
    let mut acc = [[NeumaierSum::new(); 3]; 5];
    let rem = b_remainder(lambda, n_terms as f64 + 0.5);
    acc[0][0].add(rem);
    acc[0][1].add(0.5 * rem);
    acc[0][2].add(0.5 * rem);
    let mut out = vec![vec![vec![0.0; max_l + 1]; 3]; 5];
    for n in (1..=n_terms).rev() {
        for (si, s) in Series::ALL.iter().enumerate() {
            let term = s.term(n, lambda);
            for (pi, parity) in Parity::ALL.iter().enumerate() {
                if parity.includes(n) {
                    acc[si][pi].add(term);
                }
            }
        }
        if n <= max_l + 1 {
            for si in 0..5 {
                for pi in 0..3 {
                    out[si][pi][n - 1] = acc[si][pi].sum();
                }
            }
        }
    }
    out
}

/// Compares every series and parity, full and with each `L` removed.
pub fn check_series(lambdas: &[f64], l_values: &[usize], n_terms: usize) -> CheckReport {
    let max_l = l_values.iter().copied().max().unwrap_or(0);
    let mut entries = Vec::new();
    for &lambda in lambdas {
        let brute = brute_tails(lambda, n_terms, max_l);
        let ls = std::iter::once(0).chain(l_values.iter().copied());
        for l in ls {
            for (si, &series) in Series::ALL.iter().enumerate() {
                for (pi, &parity) in Parity::ALL.iter().enumerate() {
                    let analytic = tail_sum(series, parity, lambda, l);
                    let b = brute[si][pi][l];
                    entries.push(CheckEntry {
                        series,
                        parity,
                        lambda,
                        l_terms: l,
                        analytic,
                        brute: b,
                        rel_err: (analytic - b).abs() / b.abs(),
                    });
                }
            }
        }
    }
    CheckReport { entries }
}
