//! Square-full numbers: membership, the unique `f = a²b³` decomposition with `b`
//! square-free, enumeration, and the counting functions Q(x), Q_B(x).
//!
//! 1 counts as square-full (`1 = 1²·1³`).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::arith::icbrt;
use crate::error::{Error, Result};
use crate::sieve::{is_prime_u64, SIEVE_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SquarefullDecomposition {
    pub f: u64,
    pub a: u64,
    /// Square-free.
    pub b: u64,
}

/// Restriction to decompositions with `b <= B`. Any real `B >= 1` is accepted; `B = 1`
/// leaves only the perfect squares.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() || b < 1.0 {
            return Err(Error::range(
                "B",
                b,
                "truncation level must be a finite real >= 1",
            ));
        }
        Ok(Self(b))
    }

    /// `B = ⌈(log X)^4⌉`, natural log.
    pub fn log4(x: u64) -> Result<Self> {
        Self::new(((x as f64).ln().powi(4)).ceil().max(1.0))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Largest admissible integer `b`.
    pub fn max_b(&self) -> u64 {
        if self.0 >= u64::MAX as f64 {
            u64::MAX
        } else {
            self.0.floor() as u64
        }
    }
}

/// Largest `b` to consider for square-full numbers up to `hi`.
fn b_limit(hi: u64, trunc: Option<TruncationLevel>) -> u64 {
    let cube = icbrt(hi);
    trunc.map_or(cube, |t| t.max_b().min(cube))
}

/// Square-free integers in `[1, n]`, ascending.
pub fn squarefree_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut keep = vec![true; n + 1];
    let mut d = 2usize;
    while d * d <= n {
        let sq = d * d;
        let mut j = sq;
        while j <= n {
            keep[j] = false;
            j += sq;
        }
        d += 1;
    }
    (1..=n).filter(|&i| keep[i]).map(|i| i as u64).collect()
}

/// Factorization of `f` if it is square-full.
///
/// Trial division only runs to ∛f: once those primes are removed, a square-full
/// cofactor can only be 1 or the square of a single prime.
fn squarefull_factorization(f: u64) -> Option<Vec<(u64, u32)>> {
    let mut n = f;
    let mut out = Vec::new();
    let cube = icbrt(f);
    let mut d = 2u64;
    while d <= cube && d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            if e == 1 {
                return None;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        let r = n.isqrt();
        if r * r != n || !is_prime_u64(r) {
            return None;
        }
        out.push((r, 2));
    }
    Some(out)
}

/// True iff every prime dividing `f` divides it at least twice.
pub fn is_squarefull(f: u64) -> Result<bool> {
    if f == 0 {
        return Err(Error::range("f", f, "is_squarefull requires f >= 1"));
    }
    Ok(squarefull_factorization(f).is_some())
}

/// The unique `(a, b)` with `f = a²b³` and `b` square-free: `b` is the product of the
/// primes that occur to an odd power in `f`.
pub fn decompose(f: u64) -> Result<SquarefullDecomposition> {
    if f == 0 {
        return Err(Error::range("f", f, "decompose requires f >= 1"));
    }
    let factors = squarefull_factorization(f)
        .ok_or_else(|| Error::Domain(format!("{f} is not square-full")))?;
    let b: u64 = factors
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p)
        .product();
    let a = (f / b.pow(3)).isqrt();
    debug_assert_eq!(a * a * b.pow(3), f);
    Ok(SquarefullDecomposition { f, a, b })
}

/// Square-full numbers in `(lo, hi]` in ascending order, produced by a k-way merge of
/// the progressions `a²b³` (one per square-free `b`).
#[derive(Debug, Clone)]
pub struct SquarefullIter {
    hi: u64,
    heap: BinaryHeap<Reverse<(u64, u64, u64)>>,
}

impl SquarefullIter {
    pub fn new(lo: u64, hi: u64, trunc: Option<TruncationLevel>) -> Result<Self> {
        if lo >= hi || hi > SIEVE_MAX {
            return Err(Error::range(
                "(lo, hi]",
                format!("({lo}, {hi}]"),
                "requires 0 <= lo < hi <= 2^62",
            ));
        }
        let mut heap = BinaryHeap::new();
        for b in squarefree_up_to(b_limit(hi, trunc)) {
            let b3 = b * b * b;
            // smallest a with a²b³ > lo
            let a = (lo / b3).isqrt() + 1;
            let f = a * a * b3;
            if f <= hi {
                heap.push(Reverse((f, a, b)));
            }
        }
        Ok(Self { hi, heap })
    }
}

impl Iterator for SquarefullIter {
    type Item = SquarefullDecomposition;

    fn next(&mut self) -> Option<Self::Item> {
        let Reverse((f, a, b)) = self.heap.pop()?;
        let next = (a + 1)
            .checked_mul(a + 1)
            .and_then(|sq| sq.checked_mul(b * b * b))
            .filter(|&v| v <= self.hi);
        if let Some(v) = next {
            self.heap.push(Reverse((v, a + 1, b)));
        }
        Some(SquarefullDecomposition { f, a, b })
    }
}

/// All square-full `f` in `(lo, hi]` (with `b <= B` when truncated), ascending.
pub fn enumerate_squarefull(
    lo: u64,
    hi: u64,
    trunc: Option<TruncationLevel>,
) -> Result<Vec<SquarefullDecomposition>> {
    Ok(SquarefullIter::new(lo, hi, trunc)?.collect())
}

/// Q(x), or Q_B(x) when truncated: Σ over square-free `b <= min(B, ∛x)` of ⌊√(x/b³)⌋.
pub fn count_squarefull(x: u64, trunc: Option<TruncationLevel>) -> u64 {
    if x == 0 {
        return 0;
    }
    squarefree_up_to(b_limit(x, trunc))
        .into_iter()
        .map(|b| (x / (b * b * b)).isqrt())
        .sum()
}

/// #{f ∈ 𝒬_B : m² <= f < (m+1)²}.
pub fn window_count(m: u64, trunc: TruncationLevel) -> Result<u64> {
    if m == 0 {
        return Err(Error::range("m", m, "window_count requires m >= 1"));
    }
    let top = (m + 1)
        .checked_mul(m + 1)
        .map(|v| v - 1)
        .filter(|&v| v <= SIEVE_MAX)
        .ok_or_else(|| Error::range("m", m, "(m+1)^2 must stay below 2^62"))?;
    let bottom = m * m - 1;
    Ok(squarefree_up_to(b_limit(top, Some(trunc)))
        .into_iter()
        .map(|b| {
            let b3 = b * b * b;
            (top / b3).isqrt() - (bottom / b3).isqrt()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize_trial, mobius};
    use proptest::prelude::*;

    /// Oracle: square-full from a full trial-division factorization.
    fn sqfull_oracle(n: u64) -> bool {
        factorize_trial(n).iter().all(|&(_, e)| e >= 2)
    }

    fn scan(lo: u64, hi: u64, max_b: u64) -> Vec<u64> {
        (lo + 1..=hi)
            .filter(|&f| sqfull_oracle(f) && decompose(f).unwrap().b <= max_b)
            .collect()
    }

    fn t(b: f64) -> TruncationLevel {
        TruncationLevel::new(b).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(is_squarefull(1).unwrap());
        assert!(!is_squarefull(12).unwrap());
        assert_eq!(factorize_trial(72), vec![(2, 3), (3, 2)]);
        assert!(is_squarefull(72).unwrap());
        assert!(is_squarefull(0).is_err());
        for n in 1..20_000 {
            assert_eq!(is_squarefull(n).unwrap(), sqfull_oracle(n), "n = {n}");
        }
        let p = 3_037_000_493u64; // prime just below 2^31.5
        assert!(is_squarefull(p * p).unwrap());
        assert!(!is_squarefull(p * 4).unwrap());
    }

    #[test]
    fn decompose_examples() {
        let d = |f| {
            let x = decompose(f).unwrap();
            (x.a, x.b)
        };
        assert_eq!(d(4), (2, 1));
        assert_eq!(d(8), (1, 2));
        // Brute-force search over all (a, b) with b square-free.
        let brute: Vec<(u64, u64)> = (1..=5u64)
            .flat_map(|b| (1..=128u64).map(move |a| (a, b)))
            .filter(|&(a, b)| mobius(b).unwrap() != 0 && a * a * b * b * b == 128)
            .collect();
        assert_eq!(brute, vec![(4, 2)]);
        assert_eq!(d(128), (4, 2));
        assert_eq!(d(1), (1, 1));
        assert!(matches!(decompose(12), Err(Error::Domain(_))));
    }

    #[test]
    fn decomposition_is_unique_to_a_million() {
        let mut seen = vec![0u8; 1_000_001];
        for b in 1..=100u64 {
            if mobius(b).unwrap() == 0 {
                continue;
            }
            let b3 = b * b * b;
            let mut a = 1;
            while a * a * b3 <= 1_000_000 {
                seen[(a * a * b3) as usize] += 1;
                a += 1;
            }
        }
        for f in 1..=1_000_000u64 {
            if seen[f as usize] > 0 {
                assert_eq!(seen[f as usize], 1, "f = {f}");
                let d = decompose(f).unwrap();
                assert_eq!(d.a * d.a * d.b.pow(3), f);
                assert_ne!(mobius(d.b).unwrap(), 0);
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let fs = |lo, hi, tr| -> Vec<u64> {
            enumerate_squarefull(lo, hi, tr)
                .unwrap()
                .iter()
                .map(|d| d.f)
                .collect()
        };
        assert_eq!(fs(0, 10, None), scan(0, 10, u64::MAX));
        assert_eq!(fs(0, 10, None), vec![1, 4, 8, 9]);
        assert_eq!(fs(0, 50, None), vec![1, 4, 8, 9, 16, 25, 27, 32, 36, 49]);
        assert_eq!(fs(0, 50, Some(t(1.0))), vec![1, 4, 9, 16, 25, 36, 49]);
        assert_eq!(fs(1000, 5000, Some(t(3.5))), scan(1000, 5000, 3));
        assert!(enumerate_squarefull(5, 5, None).is_err());
        assert!(enumerate_squarefull(0, SIEVE_MAX + 1, None).is_err());
    }

    #[test]
    fn enumeration_near_the_top() {
        let hi = SIEVE_MAX;
        let got = enumerate_squarefull(hi - 1_000_000_000, hi, None).unwrap();
        assert!(got.windows(2).all(|w| w[0].f < w[1].f));
        for d in &got {
            assert_eq!(decompose(d.f).unwrap(), *d);
        }
        assert!(!got.is_empty());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_squarefull(10, None), 4);
        assert_eq!(
            count_squarefull(100, None),
            scan(0, 100, u64::MAX).len() as u64
        );
        assert_eq!(count_squarefull(100, None), 14);
        assert_eq!(count_squarefull(100, Some(t(1.0))), 10);
        assert_eq!(count_squarefull(0, None), 0);
    }

    #[test]
    fn window_count_examples() {
        assert_eq!(window_count(3, t(1.0)).unwrap(), 1);
        assert_eq!(
            window_count(5, t(3.0)).unwrap(),
            scan(24, 35, 3).len() as u64
        );
        assert_eq!(window_count(5, t(3.0)).unwrap(), 3);
        assert_eq!(scan(99, 120, 100), vec![100, 108]);
        assert_eq!(window_count(10, t(100.0)).unwrap(), 2);
        assert!(window_count(0, t(2.0)).is_err());
    }

    #[test]
    fn characteristic_function_identity() {
        // Σ_{a²b³ = f} μ(b)² by triple brute force.
        let n = 100_000u64;
        let mut weight = vec![0i64; n as usize + 1];
        for b in 1..=icbrt(n) {
            let mu2 = mobius(b).unwrap().pow(2) as i64;
            for a in 1..=(n / b.pow(3)).isqrt() {
                weight[(a * a * b.pow(3)) as usize] += mu2;
            }
        }
        for f in 1..=n {
            assert_eq!(weight[f as usize], sqfull_oracle(f) as i64, "f = {f}");
        }
    }

    #[test]
    fn window_count_is_at_most_three_b() {
        let mut b = 2.0;
        while b <= 128.0 {
            for m in 1..=10_000 {
                assert!(window_count(m, t(b)).unwrap() as f64 <= 3.0 * b);
            }
            b *= 2.0;
        }
    }

    #[test]
    fn truncation_tail() {
        for &x in &[1_000u64, 100_000, 10_000_000, 100_000_000] {
            let full = count_squarefull(x, None);
            let mut b = 4.0;
            while b <= 1024.0 {
                let tail = (full - count_squarefull(x, Some(t(b)))) as f64;
                assert!(
                    tail <= 3.0 * (x as f64).sqrt() / b.sqrt(),
                    "x = {x}, B = {b}"
                );
                b *= 2.0;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn count_matches_enumeration(x in 1u64..10_000_000, b in 1u32..=50, truncated in any::<bool>()) {
            let tr = truncated.then(|| t(b as f64));
            let n = SquarefullIter::new(0, x, tr).unwrap().count() as u64;
            prop_assert_eq!(count_squarefull(x, tr), n);
        }
    }
}
