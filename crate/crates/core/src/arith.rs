//! Small-number arithmetic: Möbius, von Mangoldt, square-free tests and exact integer roots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::is_prime_u64;

/// Largest argument accepted by [`mobius`].
pub const MOBIUS_MAX: u64 = 1 << 63;

/// A prime power `base^exponent` with `exponent >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimePower {
    pub value: u64,
    pub base: u64,
    pub exponent: u32,
    pub log_base: f64,
}

impl PrimePower {
    pub fn new(base: u64, exponent: u32) -> Option<Self> {
        let value = base.checked_pow(exponent)?;
        Some(Self {
            value,
            base,
            exponent,
            log_base: (base as f64).ln(),
        })
    }
}

/// Factorization by trial division: `(prime, exponent)` pairs in ascending order.
pub fn factorize_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u64, 3] {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    // 6k ± 1 candidates.
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        for p in [d, d + 2] {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
        }
        d += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// μ(n) by trial division.
pub fn mobius(n: u64) -> Result<i8> {
    if n == 0 || n > MOBIUS_MAX {
        return Err(Error::range("n", n, "mobius requires 1 <= n <= 2^63"));
    }
    let mut sign = 1i8;
    for (_, e) in factorize_trial(n) {
        if e > 1 {
            return Ok(0);
        }
        sign = -sign;
    }
    Ok(sign)
}

/// True iff no prime square divides `n`. `n = 0` is rejected.
pub fn is_squarefree(n: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::range("n", n, "is_squarefree requires n >= 1"));
    }
    Ok(factorize_trial(n).iter().all(|&(_, e)| e == 1))
}

/// Exact ⌊n^(1/k)⌋ for any k ≥ 1.
pub fn iroot(n: u64, k: u32) -> u64 {
    match k {
        0 => panic!("iroot: k must be positive"),
        1 => n,
        2 => n.isqrt(),
        _ => {
            if n < 2 {
                return n;
            }
            let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
            let fits = |r: u64| r.checked_pow(k).is_some_and(|v| v <= n);
            while r > 0 && !fits(r) {
                r -= 1;
            }
            while fits(r + 1) {
                r += 1;
            }
            r
        }
    }
}

/// Exact ⌊∛n⌋.
#[inline]
pub fn icbrt(n: u64) -> u64 {
    iroot(n, 3)
}

/// ⌊n^(1/k)⌋ for `k ∈ {2, 3}`; the result `r` satisfies `r^k <= n < (r+1)^k` exactly.
pub fn integer_root(n: u64, k: u32) -> Result<u64> {
    match k {
        2 | 3 => Ok(iroot(n, k)),
        _ => Err(Error::range("k", k, "integer_root supports k in {2, 3}")),
    }
}

/// Returns `Some(p^k)` if `m` is a prime power, `None` otherwise (including `m = 1`).
///
/// Tries every exponent k with 2^k <= m and tests the k-th root with the deterministic
/// 64-bit primality test, so it never needs to factor `m`.
pub fn classify_prime_power(m: u64) -> Option<PrimePower> {
    if m < 2 {
        return None;
    }
    if is_prime_u64(m) {
        return PrimePower::new(m, 1);
    }
    let max_k = 63 - m.leading_zeros();
    (2..=max_k).find_map(|k| {
        let r = iroot(m, k);
        (r >= 2 && r.pow(k) == m && is_prime_u64(r))
            .then(|| PrimePower::new(r, k))
            .flatten()
    })
}

/// Λ(m): `log p` if `m = p^k`, else 0.
pub fn von_mangoldt(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::range("m", m, "von_mangoldt requires m >= 1"));
    }
    Ok(classify_prime_power(m).map_or(0.0, |pp| pp.log_base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    /// Oracle: μ from the definition using naive divisor scanning.
    fn mobius_naive(n: u64) -> i8 {
        let mut n = n;
        let mut k = 0;
        let mut p = 2;
        while n > 1 {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                k += 1;
            }
            p += 1;
        }
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(4).unwrap(), 0);
        assert_eq!(mobius_naive(30), -1);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(matches!(mobius(0), Err(Error::Range { .. })));
        assert!(matches!(mobius(MOBIUS_MAX + 1), Err(Error::Range { .. })));
    }

    #[test]
    fn mobius_matches_naive() {
        for n in 1..3000 {
            assert_eq!(mobius(n).unwrap(), mobius_naive(n), "n = {n}");
        }
    }

    #[test]
    fn mobius_multiplicative_on_coprime_pairs() {
        for m in 1..=100u64 {
            for n in 1..=10_000 / m {
                if gcd(m, n) == 1 {
                    assert_eq!(
                        mobius(m * n).unwrap(),
                        mobius(m).unwrap() * mobius(n).unwrap(),
                        "m = {m}, n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn von_mangoldt_examples() {
        assert_eq!(von_mangoldt(1).unwrap(), 0.0);
        assert!((von_mangoldt(8).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(von_mangoldt(6).unwrap(), 0.0);
        let pp = classify_prime_power(8).unwrap();
        assert_eq!((pp.base, pp.exponent, pp.value), (2, 3, 8));
        assert!(classify_prime_power(6).is_none());
        assert!(von_mangoldt(0).is_err());
        // Large prime power.
        let p = 4_294_967_291u64; // largest 32-bit prime
        let pp = classify_prime_power(p * p).unwrap();
        assert_eq!((pp.base, pp.exponent), (p, 2));
    }

    #[test]
    fn lambda_divisor_sum_is_log() {
        for n in 1..=10_000u64 {
            let s: f64 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| von_mangoldt(d).unwrap())
                .sum();
            assert!((s - (n as f64).ln()).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn squarefree_examples() {
        assert!(is_squarefree(1).unwrap());
        assert!(!is_squarefree(12).unwrap());
        assert_eq!(factorize_trial(105), vec![(3, 1), (5, 1), (7, 1)]);
        assert!(is_squarefree(105).unwrap());
        assert!(is_squarefree(0).is_err());
    }

    #[test]
    fn integer_root_examples() {
        assert_eq!(integer_root(0, 2).unwrap(), 0);
        assert_eq!(integer_root(63, 2).unwrap(), 7);
        let n = (1u64 << 60) - 1;
        let r = integer_root(n, 3).unwrap();
        assert_eq!(r, 1_048_575);
        assert!(r.pow(3) <= n && (r + 1).pow(3) > n);
        assert_eq!(integer_root(1 << 60, 3).unwrap(), 1 << 20);
        assert!(integer_root(10, 4).is_err());
        assert_eq!(integer_root(u64::MAX, 2).unwrap(), u32::MAX as u64);
        assert_eq!(integer_root(u64::MAX, 3).unwrap(), 2_642_245);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100_000))]
        #[test]
        fn integer_root_is_exact(n in 0u64..=(1u64 << 62), k in 2u32..=3) {
            let r = integer_root(n, k).unwrap() as u128;
            let n = n as u128;
            prop_assert!(r.pow(k) <= n);
            prop_assert!((r + 1).pow(k) > n);
        }
    }
}
