use crate::arith::iroot;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Default width of one sieve segment (number of integers covered).
pub const DEFAULT_SEGMENT_WIDTH: u64 = 1 << 22;

/// Largest `hi` a segment may reach.
pub const SIEVE_MAX: u64 = 1 << 62;

/// Odd primes up to `limit` (plus 2), used to cross off composites in a segment.
#[derive(Debug, Clone)]
pub struct BasePrimes {
    limit: u64,
    primes: Vec<u32>,
}

impl BasePrimes {
    /// All primes up to `limit`: plain Eratosthenes up to `√limit`, then segmented.
    pub fn up_to(limit: u64) -> Self {
        assert!(limit <= u32::MAX as u64, "base prime limit must fit in u32");
        let small = limit.isqrt().max(1) as usize;
        let mut composite = vec![false; small + 1];
        let mut primes = Vec::new();
        for i in 2..=small {
            if composite[i] {
                continue;
            }
            primes.push(i as u32);
            let mut j = i * i;
            while j <= small {
                composite[j] = true;
                j += i;
            }
        }
        let seed = Self {
            limit: small as u64,
            primes,
        };
        let mut primes = seed.primes.clone();
        let mut lo = small as u64;
        while lo < limit {
            let hi = (lo + DEFAULT_SEGMENT_WIDTH).min(limit);
            primes.extend(
                SieveSegment::sieve(lo, hi, &seed)
                    .primes()
                    .map(|p| p as u32),
            );
            lo = hi;
        }
        Self { limit, primes }
    }

    /// Base primes sufficient to sieve any window ending at `hi`.
    pub fn for_window_end(hi: u64) -> Self {
        Self::up_to(hi.isqrt())
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Can this table sieve a window ending at `hi`?
    pub fn covers(&self, hi: u64) -> bool {
        iroot(hi, 2) <= self.limit
    }
}

/// Primality bits for the half-open window `(lo, hi]`.
///
/// Only odd numbers are stored; bit `i` stands for `first_odd + 2i`.
#[derive(Debug, Clone)]
pub struct SieveSegment {
    lo: u64,
    hi: u64,
    first_odd: u64,
    bits: Vec<u64>,
}

impl SieveSegment {
    /// Sieves `(lo, hi]` with the checked contract: `2 <= lo < hi <= 2^62`,
    /// `hi - lo <= DEFAULT_SEGMENT_WIDTH`, and base primes reaching `√hi`.
    pub fn new(lo: u64, hi: u64, base: &BasePrimes) -> Result<Self> {
        Self::with_width_budget(lo, hi, base, DEFAULT_SEGMENT_WIDTH)
    }

    pub fn with_width_budget(lo: u64, hi: u64, base: &BasePrimes, width: u64) -> Result<Self> {
        if lo < 2 {
            return Err(Error::range("lo", lo, "segment requires lo >= 2"));
        }
        if hi <= lo || hi > SIEVE_MAX {
            return Err(Error::range("hi", hi, "segment requires lo < hi <= 2^62"));
        }
        if hi - lo > width {
            return Err(Error::Precondition(format!(
                "segment width {} exceeds the budget of {width}",
                hi - lo
            )));
        }
        if !base.covers(hi) {
            return Err(Error::Precondition(format!(
                "base primes reach {} but sieving up to {hi} needs {}",
                base.limit(),
                hi.isqrt()
            )));
        }
        Ok(Self::sieve(lo, hi, base))
    }

    /// Sieves `(lo, hi]` for any `lo < hi` without width or range checks.
    /// The caller guarantees `base.covers(hi)`.
    pub(crate) fn sieve(lo: u64, hi: u64, base: &BasePrimes) -> Self {
        debug_assert!(lo < hi && base.covers(hi));
        let first_odd = (lo + 1) | 1;
        let odd_count = if first_odd > hi {
            0
        } else {
            (hi - first_odd) / 2 + 1
        };
        let words = odd_count.div_ceil(64) as usize;
        let mut bits = vec![u64::MAX; words];
        if odd_count % 64 != 0 {
            bits[words - 1] = (1u64 << (odd_count % 64)) - 1;
        }
        if first_odd == 1 && odd_count > 0 {
            bits[0] &= !1;
        }
        for &p in base.primes().iter().skip(1) {
            let p = p as u64;
            let sq = p * p;
            if sq > hi {
                break;
            }
            let mut start = first_odd.div_ceil(p) * p;
            if start.is_multiple_of(2) {
                start += p;
            }
            let start = start.max(sq);
            if start > hi {
                continue;
            }
            let mut j = (start - first_odd) / 2;
            while j < odd_count {
                bits[(j >> 6) as usize] &= !(1u64 << (j & 63));
                j += p;
            }
        }
        Self {
            lo,
            hi,
            first_odd,
            bits,
        }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// Primality of `n`; `n` must lie in `(lo, hi]`.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(
            n > self.lo && n <= self.hi,
            "{n} outside ({}, {}]",
            self.lo,
            self.hi
        );
        if n == 2 {
            return true;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        let j = (n - self.first_odd) / 2;
        self.bits[(j >> 6) as usize] >> (j & 63) & 1 == 1
    }

    /// Primes in `(lo, hi]`, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = (self.lo < 2 && self.hi >= 2).then_some(2);
        let first_odd = self.first_odd;
        let odd = self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as u64;
                word &= word - 1;
                Some(first_odd + 2 * (w as u64 * 64 + b))
            })
        });
        two.into_iter().chain(odd)
    }

    pub fn count(&self) -> u64 {
        let two = (self.lo < 2 && self.hi >= 2) as u64;
        two + self.bits.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    }

    /// Σ log p over the primes of the segment.
    pub fn theta(&self) -> CompensatedSum {
        self.primes().map(|p| (p as f64).ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::is_prime_u64;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn segment_examples() {
        let lo = 1_000_000;
        let base = BasePrimes::for_window_end(lo + 100);
        let seg = SieveSegment::new(lo, lo + 100, &base).unwrap();
        let oracle: Vec<u64> = (lo + 1..=lo + 100).filter(|&n| trial_is_prime(n)).collect();
        assert_eq!(
            oracle,
            vec![1000003, 1000033, 1000037, 1000039, 1000081, 1000099]
        );
        assert_eq!(seg.primes().collect::<Vec<_>>(), oracle);

        let base = BasePrimes::up_to(10);
        let seg = SieveSegment::new(2, 10, &base).unwrap();
        assert_eq!(seg.primes().collect::<Vec<_>>(), vec![3, 5, 7]);

        let lo = 1_000_000_000_000;
        let base = BasePrimes::for_window_end(lo + 61);
        let seg = SieveSegment::new(lo, lo + 61, &base).unwrap();
        let oracle: Vec<u64> = (lo + 1..=lo + 61).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(seg.primes().collect::<Vec<_>>(), oracle);
        assert!(seg.is_prime(lo + 39));
    }

    #[test]
    fn segment_errors() {
        let base = BasePrimes::up_to(100);
        assert!(SieveSegment::new(1, 10, &base).is_err());
        assert!(SieveSegment::new(10, 10, &base).is_err());
        assert!(matches!(
            SieveSegment::new(1_000_000, 1_000_100, &base),
            Err(Error::Precondition(_))
        ));
        let base = BasePrimes::up_to(1 << 12);
        assert!(SieveSegment::new(2, 2 + DEFAULT_SEGMENT_WIDTH + 1, &base).is_err());
    }

    #[test]
    fn unchecked_window_from_zero() {
        let base = BasePrimes::up_to(10);
        let seg = SieveSegment::sieve(0, 100, &base);
        let oracle: Vec<u64> = (0..=100).filter(|&n| trial_is_prime(n)).collect();
        assert_eq!(seg.primes().collect::<Vec<_>>(), oracle);
        assert_eq!(seg.count(), 25);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve_to_ten_million() {
        let limit = 10_000_000;
        let base = BasePrimes::for_window_end(limit);
        let mut lo = 0;
        while lo < limit {
            let hi = (lo + DEFAULT_SEGMENT_WIDTH).min(limit);
            let seg = SieveSegment::sieve(lo, hi, &base);
            for n in lo + 1..=hi {
                let bit = n >= 2 && (n == 2 || (n % 2 == 1 && seg.is_prime(n)));
                assert_eq!(bit, is_prime_u64(n), "n = {n}");
            }
            lo = hi;
        }
    }
}
