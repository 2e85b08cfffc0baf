//! Representation functions and their short-interval sums.
//!
//! `R(N) = Σ_{m + f = N, f square-full} Λ(m)` with `m >= 1`, its squares-only analogue,
//! and the truncation `R_B(N)` that keeps only `f = a²b³` with `b <= B`. Interval sums
//! `Σ_{X < N <= X+H} R(N)` are computed by two independent routes:
//!
//! * **direct**: `R(N)` for each `N` from the Λ table;
//! * **rearranged**: `Σ_f Σ_{X-f < m <= X+H-f} Λ(m)`, where each inner window is a
//!   difference of ψ values produced by one segmented sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::{ChebyshevSweep, LambdaTable, Weights, SWEEP_BUDGET};
use crate::squarefull::{SquarefullIter, TruncationLevel};
use crate::sum::CompensatedSum;

/// Default ε for the admissible range `X^{1/2+ε} <= H <= X^{1-ε}`.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Number of consecutive `N` handled by one parallel task in the direct route.
const DIRECT_CHUNK: u64 = 256;

/// A short interval `(X, X+H]` with `4 <= H <= X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub x: u64,
    pub h: u64,
    pub epsilon: f64,
    /// Whether `H` lies in `[X^{1/2+ε}, X^{1-ε}]`, up to integer rounding of the endpoints.
    pub admissible: bool,
}

impl IntervalSpec {
    pub fn new(x: u64, h: u64) -> Result<Self> {
        Self::with_epsilon(x, h, DEFAULT_EPSILON)
    }

    pub fn with_epsilon(x: u64, h: u64, epsilon: f64) -> Result<Self> {
        if h < 4 {
            return Err(Error::range("H", h, "interval requires 4 <= H <= X"));
        }
        if h > x {
            return Err(Error::range("H", h, "interval requires H <= X"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::range(
                "epsilon",
                epsilon,
                "epsilon must lie in (0, 1/2)",
            ));
        }
        let xf = x as f64;
        let low = xf.powf(0.5 + epsilon).floor();
        let high = xf.powf(1.0 - epsilon).ceil();
        let hf = h as f64;
        Ok(Self {
            x,
            h,
            epsilon,
            admissible: low <= hf && hf <= high,
        })
    }

    /// Last `N` of the interval.
    pub fn end(&self) -> u64 {
        self.x + self.h
    }
}

/// One value `R(N)` with the number of nonzero Λ terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReprValue {
    pub n: u64,
    pub value: f64,
    pub term_count: u64,
}

/// An interval sum; `term_count` is only known on the direct route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSum {
    pub value: f64,
    pub error_bound: f64,
    pub term_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationGap {
    pub n: u64,
    /// `R(N) - R_B(N)`, summed directly over the excluded `f`, hence never negative.
    pub gap: f64,
    /// `√N · log N · B^{-1/2}`.
    pub bound: f64,
}

fn check_n(n: u64, table: &LambdaTable) -> Result<()> {
    if n < 2 {
        return Err(Error::range("N", n, "representation functions need N >= 2"));
    }
    if n - 1 > table.limit() {
        return Err(Error::range("N", n, "N - 1 exceeds the lambda table limit"));
    }
    Ok(())
}

/// Σ_{f in fs, f < n} Λ(n − f) accumulated in ascending `f`.
fn accumulate(n: u64, fs: &[u64], table: &LambdaTable, acc: &mut CompensatedSum) -> u64 {
    let mut terms = 0;
    for &f in fs.iter().take_while(|&&f| f < n) {
        let l = table.lambda(n - f);
        if l != 0.0 {
            acc.add(l);
            terms += 1;
        }
    }
    terms
}

fn squarefull_values(hi: u64, trunc: Option<TruncationLevel>) -> Vec<u64> {
    if hi == 0 {
        return Vec::new();
    }
    SquarefullIter::new(0, hi, trunc)
        .expect("0 < hi <= 2^62")
        .map(|d| d.f)
        .collect()
}

fn repr_from(n: u64, fs: &[u64], table: &LambdaTable) -> ReprValue {
    let mut acc = CompensatedSum::new();
    let term_count = accumulate(n, fs, table, &mut acc);
    ReprValue {
        n,
        value: acc.value(),
        term_count,
    }
}

/// R(N) = Σ_{m + f = N, f square-full, m >= 1} Λ(m).
pub fn repr_sqfull(n: u64, table: &LambdaTable) -> Result<ReprValue> {
    check_n(n, table)?;
    Ok(repr_from(n, &squarefull_values(n - 1, None), table))
}

/// Σ_{m + k² = N, k >= 1} Λ(m).
pub fn repr_sq(n: u64, table: &LambdaTable) -> Result<ReprValue> {
    check_n(n, table)?;
    let squares: Vec<u64> = (1..).map(|k: u64| k * k).take_while(|&s| s < n).collect();
    Ok(repr_from(n, &squares, table))
}

/// R_B(N) = Σ_{m + a²b³ = N, b <= B} Λ(m) μ(b)².
pub fn repr_truncated(n: u64, trunc: TruncationLevel, table: &LambdaTable) -> Result<ReprValue> {
    check_n(n, table)?;
    Ok(repr_from(n, &squarefull_values(n - 1, Some(trunc)), table))
}

pub fn truncation_gap(
    n: u64,
    trunc: TruncationLevel,
    table: &LambdaTable,
) -> Result<TruncationGap> {
    check_n(n, table)?;
    let max_b = trunc.max_b();
    let mut acc = CompensatedSum::new();
    if n > 1 {
        for d in SquarefullIter::new(0, n - 1, None)?.filter(|d| d.b > max_b) {
            acc.add(table.lambda(n - d.f));
        }
    }
    let nf = n as f64;
    Ok(TruncationGap {
        n,
        gap: acc.value(),
        bound: nf.sqrt() * nf.ln() / trunc.value().sqrt(),
    })
}

/// Σ_{X < N <= X+H} R(N) (or R_B), one `N` at a time.
pub fn interval_sum_direct(
    spec: &IntervalSpec,
    trunc: Option<TruncationLevel>,
    table: &LambdaTable,
) -> Result<IntervalSum> {
    if spec.end() > table.limit() {
        return Err(Error::range(
            "X + H",
            spec.end(),
            "X + H exceeds the lambda table limit",
        ));
    }
    let fs = squarefull_values(spec.end() - 1, trunc);
    let chunks = spec.h.div_ceil(DIRECT_CHUNK);
    let partials: Vec<(CompensatedSum, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = spec.x + 1 + c * DIRECT_CHUNK;
            let last = (first + DIRECT_CHUNK - 1).min(spec.end());
            let mut acc = CompensatedSum::new();
            let terms = (first..=last)
                .map(|n| accumulate(n, &fs, table, &mut acc))
                .sum();
            (acc, terms)
        })
        .collect();
    let mut total = CompensatedSum::new();
    let mut term_count = 0;
    for (acc, terms) in &partials {
        total.merge(acc);
        term_count += terms;
    }
    Ok(IntervalSum {
        value: total.value(),
        error_bound: total.error_bound(),
        term_count: Some(term_count),
    })
}

/// Σ_f [ψ(X+H−f) − ψ(X−f)] over square-full `f <= X+H−1`, with a fresh sweep.
pub fn interval_sum_rearranged(
    spec: &IntervalSpec,
    trunc: Option<TruncationLevel>,
) -> Result<IntervalSum> {
    if spec.end() > SWEEP_BUDGET {
        return Err(Error::range(
            "X + H",
            spec.end(),
            "rearranged route is limited to X + H <= 2^37",
        ));
    }
    let sweep = ChebyshevSweep::new(spec.end() - 1)?;
    interval_sum_rearranged_with(spec, trunc, &sweep)
}

/// [`interval_sum_rearranged`] reusing a sweep that reaches at least `X + H − 1`.
pub fn interval_sum_rearranged_with(
    spec: &IntervalSpec,
    trunc: Option<TruncationLevel>,
    sweep: &ChebyshevSweep,
) -> Result<IntervalSum> {
    let (x, end) = (spec.x, spec.end());
    let windows: Vec<(u64, u64)> = squarefull_values(end - 1, trunc)
        .into_iter()
        .map(|f| (x.saturating_sub(f), end - f))
        .collect();
    let values = sweep.window_sums(&windows, Weights::Psi)?;
    let total: CompensatedSum = values.into_iter().sum();
    Ok(IntervalSum {
        value: total.value(),
        error_bound: total.error_bound(),
        term_count: None,
    })
}
