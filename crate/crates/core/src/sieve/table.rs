use rayon::prelude::*;

use crate::arith::PrimePower;
use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, CompensatedValue};

use super::segment::{BasePrimes, SieveSegment};

/// Default upper bound on a table's `limit`.
pub const DEFAULT_TABLE_BUDGET: u64 = 2_000_000_000;

const WHEEL: u64 = 30;
const RESIDUES: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
const NO_BIT: u8 = u8::MAX;
const RESIDUE_BIT: [u8; 30] = {
    let mut t = [NO_BIT; 30];
    let mut i = 0;
    while i < 8 {
        t[RESIDUES[i] as usize] = i as u8;
        i += 1;
    }
    t
};

/// Wheel bytes built per parallel chunk (each byte covers 30 integers).
const CHUNK_BYTES: u64 = 1 << 17;

/// Von Mangoldt lookup on `[1, limit]`.
///
/// Primes live in a wheel-30 bit table (one byte per 30 integers); the sparse
/// prime powers `p^k`, `k >= 2`, are kept in a sorted list.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    limit: u64,
    wheel: Vec<u8>,
    prime_powers: Vec<PrimePower>,
}

impl LambdaTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_budget(limit, DEFAULT_TABLE_BUDGET)
    }

    pub fn build_with_budget(limit: u64, budget: u64) -> Result<Self> {
        if limit > budget {
            return Err(Error::Resource {
                what: "lambda table",
                required_bytes: Self::required_bytes(limit),
                limit,
                budget,
            });
        }
        let base = BasePrimes::for_window_end(limit);
        let total_bytes = limit / WHEEL + 1;
        let chunks = total_bytes.div_ceil(CHUNK_BYTES);
        let wheel: Vec<u8> = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let first_byte = c * CHUNK_BYTES;
                let last_byte = ((c + 1) * CHUNK_BYTES).min(total_bytes);
                let lo = first_byte * WHEEL;
                let hi = (last_byte * WHEEL - 1).min(limit);
                let seg = SieveSegment::sieve(lo.saturating_sub(1), hi, &base);
                let mut out = vec![0u8; (last_byte - first_byte) as usize];
                for p in seg.primes() {
                    let bit = RESIDUE_BIT[(p % WHEEL) as usize];
                    if bit != NO_BIT {
                        out[(p / WHEEL - first_byte) as usize] |= 1 << bit;
                    }
                }
                out
            })
            .collect();

        let mut prime_powers: Vec<PrimePower> = base
            .primes()
            .iter()
            .flat_map(|&p| {
                let p = p as u64;
                (2..).map_while(move |k| PrimePower::new(p, k).filter(|pp| pp.value <= limit))
            })
            .collect();
        prime_powers.sort_by_key(|pp| pp.value);

        Ok(Self {
            limit,
            wheel,
            prime_powers,
        })
    }

    /// Approximate memory footprint of a table for `limit`.
    pub fn required_bytes(limit: u64) -> u64 {
        let powers = 2 * limit.isqrt() + 64;
        limit / WHEEL + 1 + powers * std::mem::size_of::<PrimePower>() as u64
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Prime powers `p^k` with `k >= 2`, ascending.
    pub fn prime_powers(&self) -> &[PrimePower] {
        &self.prime_powers
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.limit {
            return Err(Error::range("n", n, "argument exceeds the table limit"));
        }
        Ok(())
    }

    /// Primality of `n <= limit`. Panics beyond the limit.
    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} exceeds table limit {}", self.limit);
        match n {
            0 | 1 => false,
            2 | 3 | 5 => true,
            _ => {
                let bit = RESIDUE_BIT[(n % WHEEL) as usize];
                bit != NO_BIT && self.wheel[(n / WHEEL) as usize] >> bit & 1 == 1
            }
        }
    }

    pub fn prime_power(&self, n: u64) -> Option<&PrimePower> {
        self.prime_powers
            .binary_search_by_key(&n, |pp| pp.value)
            .ok()
            .map(|i| &self.prime_powers[i])
    }

    /// Λ(n) for `1 <= n <= limit`. Panics beyond the limit.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        if self.is_prime(n) {
            (n as f64).ln()
        } else {
            self.prime_power(n).map_or(0.0, |pp| pp.log_base)
        }
    }

    pub fn try_lambda(&self, n: u64) -> Result<f64> {
        self.check(n)?;
        Ok(self.lambda(n))
    }

    /// Calls `f` on every prime in `(lo, hi]`, ascending. Requires `hi <= limit`.
    pub fn for_each_prime(&self, lo: u64, hi: u64, mut f: impl FnMut(u64)) {
        if hi <= lo {
            return;
        }
        assert!(hi <= self.limit, "{hi} exceeds table limit {}", self.limit);
        for p in [2, 3, 5] {
            if p > lo && p <= hi {
                f(p);
            }
        }
        let first = (lo + 1) / WHEEL;
        let last = hi / WHEEL;
        for byte in first..=last {
            let mut bits = self.wheel[byte as usize];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let n = byte * WHEEL + RESIDUES[b];
                if n > lo && n <= hi {
                    f(n);
                }
            }
        }
    }

    pub fn count_primes(&self, lo: u64, hi: u64) -> u64 {
        let mut count = 0;
        self.for_each_prime(lo, hi, |_| count += 1);
        count
    }

    /// Σ log p over primes in `(lo, hi]`.
    pub fn theta_range(&self, lo: u64, hi: u64) -> CompensatedSum {
        let mut acc = CompensatedSum::new();
        self.for_each_prime(lo, hi, |p| acc.add((p as f64).ln()));
        acc
    }

    /// Σ Λ(n) over `(lo, hi]`: primes first, then the prime powers in the window.
    pub fn psi_range(&self, lo: u64, hi: u64) -> CompensatedSum {
        let mut acc = self.theta_range(lo, hi);
        if hi > lo {
            let start = self.prime_powers.partition_point(|pp| pp.value <= lo);
            let end = self.prime_powers.partition_point(|pp| pp.value <= hi);
            for pp in &self.prime_powers[start..end] {
                acc.add(pp.log_base);
            }
        }
        acc
    }

    /// ψ(x) = Σ_{m <= x} Λ(m).
    pub fn chebyshev_psi(&self, x: u64) -> Result<CompensatedValue> {
        self.check(x)?;
        Ok(self.psi_range(0, x).into_value())
    }

    /// θ(x) = Σ_{p <= x} log p.
    pub fn chebyshev_theta(&self, x: u64) -> Result<CompensatedValue> {
        self.check(x)?;
        Ok(self.theta_range(0, x).into_value())
    }
}
