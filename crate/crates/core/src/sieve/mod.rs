//! Prime and von Mangoldt tables: a wheel-30 table up to a limit, segmented sieves for
//! windows near large X, and the Chebyshev sums θ and ψ.

mod chebyshev;
mod primality;
mod segment;
mod table;

pub use chebyshev::{
    chebyshev_psi_sweep, chebyshev_theta, theta_between, theta_between_with, ChebyshevSweep,
    Weights, SWEEP_BUDGET,
};
pub use primality::is_prime_u64;
pub use segment::{BasePrimes, SieveSegment, DEFAULT_SEGMENT_WIDTH, SIEVE_MAX};
pub use table::{LambdaTable, DEFAULT_TABLE_BUDGET};

use crate::error::Result;

/// Sieves `(lo, hi]`, building base primes up to `√hi` on the fly.
pub fn sieve_segment(lo: u64, hi: u64) -> Result<SieveSegment> {
    let base = BasePrimes::for_window_end(hi.min(SIEVE_MAX));
    SieveSegment::new(lo, hi, &base)
}
