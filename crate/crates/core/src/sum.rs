//! Compensated (Neumaier) summation.
//!
//! Every Λ-weighted sum in the crate runs through [`CompensatedSum`]. Besides the
//! corrected total it tracks Σ|xᵢ| and the term count, which gives a rigorous
//! a-posteriori error bound for the accumulation.

use std::iter::Sum;
use std::ops::AddAssign;

/// Unit roundoff of binary64.
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
    terms: u64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
            abs_sum: 0.0,
            terms: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.terms += 1;
    }

    /// Merges another accumulator (both the running sum and its compensation).
    pub fn merge(&mut self, other: &CompensatedSum) {
        let terms = self.terms + other.terms;
        let abs_sum = self.abs_sum + other.abs_sum;
        self.add(other.sum);
        self.add(other.compensation);
        self.terms = terms;
        self.abs_sum = abs_sum;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// `self - other` evaluated on the (sum, compensation) pairs separately, which keeps
    /// the difference of two nearby prefix sums accurate.
    pub fn difference(&self, other: &CompensatedSum) -> f64 {
        (self.sum - other.sum) + (self.compensation - other.compensation)
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    /// Bound on |value() − exact Σ xᵢ|, assuming each term carries at most one
    /// rounding error of its own (true for correctly rounded `ln`).
    ///
    /// Neumaier summation satisfies |E| ≤ (2u + O(n u²)) Σ|xᵢ|; one more `u` covers the
    /// input rounding and the final `sum + compensation` addition.
    pub fn error_bound(&self) -> f64 {
        let u = UNIT_ROUNDOFF;
        let n = self.terms as f64;
        (3.0 * u + 2.0 * n * u * u) * self.abs_sum + u * self.value().abs()
    }

    pub fn into_value(self) -> CompensatedValue {
        CompensatedValue {
            value: self.value(),
            error_bound: self.error_bound(),
        }
    }
}

impl AddAssign<f64> for CompensatedSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// A floating-point result together with a bound on its accumulated rounding error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompensatedValue {
    pub value: f64,
    pub error_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_low_bits() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let naive: f64 = (0..10_000_000).map(|_| 0.1).sum();
        let acc: CompensatedSum = (0..10_000_000).map(|_| 0.1).sum();
        let exact = 1_000_000.0;
        assert!((acc.value() - exact).abs() <= acc.error_bound() + 1e-9 * 0.1);
        assert!((acc.value() - exact).abs() < (naive - exact).abs());
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..5000).map(|i| (i as f64).ln()).collect();
        let all: CompensatedSum = xs.iter().copied().sum();
        let (a, b) = xs.split_at(1234);
        let mut left: CompensatedSum = a.iter().copied().sum();
        let right: CompensatedSum = b.iter().copied().sum();
        left.merge(&right);
        assert!((left.value() - all.value()).abs() <= 1e-12 * all.value());
        assert_eq!(left.terms(), all.terms());
    }
}
