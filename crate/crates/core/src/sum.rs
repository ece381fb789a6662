//! Compensated (Neumaier) summation.

use std::ops::AddAssign;

/// Running sum with Neumaier's error compensation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_under_large_cancellation() {
        let s = compensated_sum([1e200, 0.1, 0.2, 0.3, -1e200]);
        assert!((s - 0.6).abs() < 1e-15);
    }

    #[test]
    fn harmonic_tail_beats_naive() {
        let terms: Vec<f64> = (1..=1_000_000u64).map(|n| 1.0 / (n as f64 * n as f64)).collect();
        let exact = std::f64::consts::PI.powi(2) / 6.0 - 1.0 / 1_000_000.5;
        let comp = compensated_sum(terms.iter().copied());
        assert!((comp - exact).abs() < 1e-15, "{comp} vs {exact}");
    }
}
