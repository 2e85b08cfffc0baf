use rayon::prelude::*;

use crate::arith::PrimePower;
use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, CompensatedValue};

use super::segment::{BasePrimes, SieveSegment, DEFAULT_SEGMENT_WIDTH, SIEVE_MAX};

/// Largest `x` for which [`chebyshev_theta`] will run a full sweep.
pub const SWEEP_BUDGET: u64 = 1 << 37;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    /// log p on primes only.
    Theta,
    /// Λ(n): log p on every prime power.
    Psi,
}

/// Evaluates θ or ψ at many points with one pass of a segmented sieve over `[1, max]`.
///
/// Segments are aligned blocks `(kW, (k+1)W]`, sieved in parallel; each block reports
/// its total and the partial sums at the query points it contains, and a serial
/// prefix pass stitches them together in block order. The result is therefore
/// independent of the number of worker threads.
#[derive(Debug, Clone)]
pub struct ChebyshevSweep {
    max: u64,
    width: u64,
    base: BasePrimes,
    prime_powers: Vec<PrimePower>,
}

impl ChebyshevSweep {
    pub fn new(max: u64) -> Result<Self> {
        Self::with_width(max, DEFAULT_SEGMENT_WIDTH)
    }

    pub fn with_width(max: u64, width: u64) -> Result<Self> {
        if max > SIEVE_MAX {
            return Err(Error::range("max", max, "sweep requires max <= 2^62"));
        }
        if width < 64 {
            return Err(Error::range("width", width, "segment width must be >= 64"));
        }
        let base = BasePrimes::for_window_end(max);
        let mut prime_powers: Vec<PrimePower> = base
            .primes()
            .iter()
            .flat_map(|&p| {
                (2..).map_while(move |k| PrimePower::new(p as u64, k).filter(|pp| pp.value <= max))
            })
            .collect();
        prime_powers.sort_by_key(|pp| pp.value);
        Ok(Self {
            max,
            width,
            base,
            prime_powers,
        })
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    /// Prefix sums `Σ_{n <= q} w(n)` for each query point `q`, returned in input order.
    ///
    /// The returned accumulators keep their compensation term, so differences of two
    /// nearby prefixes should be taken with [`CompensatedSum::difference`].
    pub fn prefix_sums(&self, points: &[u64], weights: Weights) -> Result<Vec<CompensatedSum>> {
        let mut order: Vec<(u64, usize)> = points.iter().copied().zip(0..).collect();
        order.sort_unstable();
        let top = order.last().map_or(0, |&(q, _)| q);
        if top > self.max {
            return Err(Error::range(
                "point",
                top,
                "query point exceeds the sweep limit",
            ));
        }
        let blocks = top.div_ceil(self.width).max(1);

        let per_block: Vec<(CompensatedSum, Vec<(usize, CompensatedSum)>)> = (0..blocks)
            .into_par_iter()
            .map(|k| {
                let lo = k * self.width;
                let hi = (lo + self.width).min(top.max(1));
                let start = order.partition_point(|&(q, _)| q <= lo);
                let end = order.partition_point(|&(q, _)| q <= hi);
                // Points equal to 0 sit before every block.
                let start = if k == 0 { 0 } else { start };
                self.scan_block(lo, hi, &order[start..end], weights)
            })
            .collect();

        let mut out = vec![CompensatedSum::new(); points.len()];
        let mut running = CompensatedSum::new();
        for (total, partials) in per_block {
            for (idx, partial) in partials {
                let mut v = running;
                v.merge(&partial);
                out[idx] = v;
            }
            running.merge(&total);
        }
        Ok(out)
    }

    fn scan_block(
        &self,
        lo: u64,
        hi: u64,
        points: &[(u64, usize)],
        weights: Weights,
    ) -> (CompensatedSum, Vec<(usize, CompensatedSum)>) {
        let seg = SieveSegment::sieve(lo, hi, &self.base);
        let powers: &[PrimePower] = match weights {
            Weights::Theta => &[],
            Weights::Psi => {
                let a = self.prime_powers.partition_point(|pp| pp.value <= lo);
                let b = self.prime_powers.partition_point(|pp| pp.value <= hi);
                &self.prime_powers[a..b]
            }
        };
        let mut acc = CompensatedSum::new();
        let mut partials = Vec::with_capacity(points.len());
        let mut pts = points.iter().peekable();
        let mut pws = powers.iter().peekable();
        let mut emit_below = |n: u64, acc: &CompensatedSum, partials: &mut Vec<_>| {
            while let Some(&&(q, idx)) = pts.peek() {
                if q >= n {
                    break;
                }
                partials.push((idx, *acc));
                pts.next();
            }
        };
        for p in seg.primes() {
            while let Some(pp) = pws.next_if(|pp| pp.value < p) {
                emit_below(pp.value, &acc, &mut partials);
                acc.add(pp.log_base);
            }
            emit_below(p, &acc, &mut partials);
            acc.add((p as f64).ln());
        }
        for pp in pws {
            emit_below(pp.value, &acc, &mut partials);
            acc.add(pp.log_base);
        }
        emit_below(u64::MAX, &acc, &mut partials);
        (acc, partials)
    }

    /// Σ over windows `(lo_i, hi_i]` of the chosen weights, one value per window.
    pub fn window_sums(&self, windows: &[(u64, u64)], weights: Weights) -> Result<Vec<f64>> {
        let points: Vec<u64> = windows.iter().flat_map(|&(a, b)| [a, b]).collect();
        let prefix = self.prefix_sums(&points, weights)?;
        Ok(prefix
            .chunks_exact(2)
            .map(|pair| pair[1].difference(&pair[0]))
            .collect())
    }
}

/// θ(x) by a full segmented sweep (no table needed).
pub fn chebyshev_theta(x: u64) -> Result<CompensatedValue> {
    if x > SWEEP_BUDGET {
        return Err(Error::range(
            "x",
            x,
            "chebyshev_theta sweep is limited to 2^37",
        ));
    }
    let sweep = ChebyshevSweep::new(x)?;
    Ok(sweep.prefix_sums(&[x], Weights::Theta)?[0].into_value())
}

/// ψ(x) by a full segmented sweep (no table needed).
pub fn chebyshev_psi_sweep(x: u64) -> Result<CompensatedValue> {
    if x > SWEEP_BUDGET {
        return Err(Error::range(
            "x",
            x,
            "chebyshev_psi sweep is limited to 2^37",
        ));
    }
    let sweep = ChebyshevSweep::new(x)?;
    Ok(sweep.prefix_sums(&[x], Weights::Psi)?[0].into_value())
}

/// θ(t + h) − θ(t) = Σ_{t < p <= t+h} log p, sieving the window in segments.
pub fn theta_between(t: u64, h: u64) -> Result<CompensatedValue> {
    let hi = t.checked_add(h).filter(|&hi| hi <= SIEVE_MAX);
    let Some(hi) = hi else {
        return Err(Error::range(
            "t + H",
            t as u128 + h as u128,
            "window must end at or below 2^62",
        ));
    };
    let base = BasePrimes::for_window_end(hi);
    Ok(theta_between_with(t, h, &base)?.into_value())
}

/// [`theta_between`] with caller-supplied base primes.
pub fn theta_between_with(t: u64, h: u64, base: &BasePrimes) -> Result<CompensatedSum> {
    if t < 1 {
        return Err(Error::range("t", t, "theta_between requires t >= 1"));
    }
    if h < 1 {
        return Err(Error::range("H", h, "theta_between requires H >= 1"));
    }
    let end = t
        .checked_add(h)
        .filter(|&e| e <= SIEVE_MAX)
        .ok_or_else(|| {
            Error::range(
                "t + H",
                t as u128 + h as u128,
                "window must end at or below 2^62",
            )
        })?;
    if !base.covers(end) {
        return Err(Error::Precondition(format!(
            "base primes reach {} but the window ends at {end}",
            base.limit()
        )));
    }
    let mut acc = CompensatedSum::new();
    let mut lo = t;
    while lo < end {
        let hi = (lo + DEFAULT_SEGMENT_WIDTH).min(end);
        for p in SieveSegment::sieve(lo, hi, base).primes() {
            acc.add((p as f64).ln());
        }
        lo = hi;
    }
    Ok(acc)
}
