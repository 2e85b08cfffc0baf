//! Main terms, counting-function fits, the Σ₁/Σ₂ split, the smoothing residual, and a
//! sampled second moment of prime sums in short intervals.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr::IntervalSpec;
use crate::sieve::{theta_between_with, BasePrimes, LambdaTable, SIEVE_MAX};
use crate::squarefull::{count_squarefull, is_squarefull, SquarefullIter, TruncationLevel};
use crate::sum::CompensatedSum;
use crate::zeta::ZetaConstants;

/// Grid used to pick the second-order coefficient of Q(x).
pub const CALIBRATION_GRID: [u64; 7] = [
    10_000,
    100_000,
    1_000_000,
    10_000_000,
    100_000_000,
    1_000_000_000,
    10_000_000_000,
];

/// A predicted value against a measured one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub x: u64,
    pub predicted: f64,
    pub actual: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// Scale the error is measured against (x^{1/6} for Q(x), the prediction for windows).
    pub error_normalizer: f64,
}

impl AsymptoticFit {
    pub fn new(x: u64, predicted: f64, actual: f64, error_normalizer: f64) -> Self {
        let abs_error = (predicted - actual).abs();
        let rel_error = if actual != 0.0 {
            abs_error / actual.abs()
        } else {
            f64::INFINITY
        };
        Self {
            x,
            predicted,
            actual,
            abs_error,
            rel_error,
            error_normalizer,
        }
    }

    pub fn normalized_error(&self) -> f64 {
        self.abs_error / self.error_normalizer
    }
}

/// ζ(3/2)/ζ(3) · H · √X.
pub fn main_term(spec: &IntervalSpec, constants: &ZetaConstants) -> f64 {
    constants.leading_ratio * spec.h as f64 * (spec.x as f64).sqrt()
}

/// Denominator of the x^{1/3} coefficient in the two-term expansion of Q(x).
///
/// The statement being checked prints ζ(2/3)/ζ(3); the classical form has ζ(2/3)/ζ(2).
/// Both are available and [`SecondTermVariant::calibrated`] picks the one that fits
/// exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondTermVariant {
    Zeta3Denominator,
    Zeta2Denominator,
}

impl SecondTermVariant {
    pub const ALL: [SecondTermVariant; 2] = [Self::Zeta3Denominator, Self::Zeta2Denominator];

    pub fn coefficient(self, constants: &ZetaConstants) -> f64 {
        match self {
            Self::Zeta3Denominator => constants.second_coefficient_zeta3(),
            Self::Zeta2Denominator => constants.second_coefficient_zeta2(),
        }
    }

    /// The variant selected against [`CALIBRATION_GRID`] with the shared constants.
    pub fn calibrated() -> SecondTermVariant {
        static CHOICE: OnceLock<SecondTermVariant> = OnceLock::new();
        *CHOICE.get_or_init(|| {
            calibrate_second_term(ZetaConstants::shared(), &CALIBRATION_GRID).selected
        })
    }
}

impl fmt::Display for SecondTermVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zeta3Denominator => "zeta3_denominator",
            Self::Zeta2Denominator => "zeta2_denominator",
        })
    }
}

impl FromStr for SecondTermVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta3_denominator" | "zeta3" => Ok(Self::Zeta3Denominator),
            "zeta2_denominator" | "zeta2" => Ok(Self::Zeta2Denominator),
            other => Err(Error::Config(format!(
                "unknown second-term variant `{other}`"
            ))),
        }
    }
}

/// ζ(3/2)/ζ(3)·x^{1/2} + c₂·x^{1/3}.
pub fn bateman_grosswald(
    x: u64,
    constants: &ZetaConstants,
    variant: SecondTermVariant,
) -> Result<f64> {
    if x == 0 {
        return Err(Error::range("x", x, "bateman_grosswald requires x >= 1"));
    }
    let xf = x as f64;
    Ok(constants.leading_ratio * xf.sqrt() + variant.coefficient(constants) * xf.cbrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub selected: SecondTermVariant,
    /// max over the grid of |Q(x) − prediction| / x^{1/6}, per variant.
    pub scores: Vec<(SecondTermVariant, f64)>,
}

pub fn calibrate_second_term(constants: &ZetaConstants, grid: &[u64]) -> Calibration {
    let scores: Vec<(SecondTermVariant, f64)> = SecondTermVariant::ALL
        .iter()
        .map(|&v| {
            let worst = grid
                .iter()
                .map(|&x| {
                    qx_fit(x, constants, v).map_or(f64::INFINITY, |fit| fit.normalized_error())
                })
                .fold(0.0, f64::max);
            (v, worst)
        })
        .collect();
    let selected = scores
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|s| s.0)
        .unwrap_or(SecondTermVariant::Zeta2Denominator);
    Calibration { selected, scores }
}

/// Exact Q(x) against the two-term prediction, normalized by x^{1/6}.
pub fn qx_fit(
    x: u64,
    constants: &ZetaConstants,
    variant: SecondTermVariant,
) -> Result<AsymptoticFit> {
    let predicted = bateman_grosswald(x, constants, variant)?;
    let actual = count_squarefull(x, None) as f64;
    Ok(AsymptoticFit::new(
        x,
        predicted,
        actual,
        (x as f64).powf(1.0 / 6.0),
    ))
}

/// ζ(3/2)/(2ζ(3)) · H · x^{−1/2}.
pub fn filaseta_trifonov_window(x: u64, h: u64, constants: &ZetaConstants) -> Result<f64> {
    if x == 0 || h == 0 {
        return Err(Error::range(
            "(x, H)",
            format!("({x}, {h})"),
            "window requires x >= 1 and H >= 1",
        ));
    }
    Ok(constants.leading_ratio / 2.0 * h as f64 / (x as f64).sqrt())
}

/// Exact Q(x+H) − Q(x) against [`filaseta_trifonov_window`].
pub fn window_fit(x: u64, h: u64, constants: &ZetaConstants) -> Result<AsymptoticFit> {
    let predicted = filaseta_trifonov_window(x, h, constants)?;
    let top = x
        .checked_add(h)
        .filter(|&t| t <= SIEVE_MAX)
        .ok_or_else(|| {
            Error::range(
                "x + H",
                x as u128 + h as u128,
                "window must end at or below 2^62",
            )
        })?;
    let actual = (count_squarefull(top, None) - count_squarefull(x, None)) as f64;
    Ok(AsymptoticFit::new(x, predicted, actual, predicted))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaDecomposition {
    /// Σ_f ∫_m^{m+1} (Σ_{X−u² < p <= X+H−u²} log p − H) du, the fluctuation term.
    pub sigma1: f64,
    /// H · Q_B(X − 2H), the counting term.
    pub sigma2: f64,
    /// #{f ∈ 𝒬_B : f <= X − 2H}.
    pub count: u64,
    /// Σ_f (θ(X+H−f) − θ(X−f)) over the same f, for comparison with the smoothed form.
    pub restricted_theta_sum: f64,
}

/// ∫_m^{m+1} θ(Y − u²) du, evaluated exactly: the integrand is a step function whose
/// jumps sit at u = √(Y − p), so each prime contributes log p times the length of
/// {u ∈ [m, m+1] : u² <= Y − p}.
fn smoothed_theta(y: u64, m: u64, table: &LambdaTable) -> f64 {
    let full_top = y.saturating_sub((m + 1) * (m + 1));
    let partial_top = y.saturating_sub(m * m);
    let mut acc = table.theta_range(0, full_top);
    let mf = m as f64;
    table.for_each_prime(full_top, partial_top, |p| {
        let len = (((y - p) as f64).sqrt() - mf).clamp(0.0, 1.0);
        acc.add((p as f64).ln() * len);
    });
    acc.value()
}

/// ∫_m^{m+1} Σ_{X−u² < p <= X+H−u²} log p du.
fn smoothed_window(spec: &IntervalSpec, m: u64, table: &LambdaTable) -> f64 {
    let y = spec.end();
    let full_hi = y.saturating_sub((m + 1) * (m + 1));
    let full_lo = spec.x.saturating_sub((m + 1) * (m + 1));
    let core = table.theta_range(full_lo, full_hi).value();
    let fringe = |y: u64| {
        let lo = y.saturating_sub((m + 1) * (m + 1));
        let hi = y.saturating_sub(m * m);
        let mf = m as f64;
        let mut acc = CompensatedSum::new();
        table.for_each_prime(lo, hi, |p| {
            let len = (((y - p) as f64).sqrt() - mf).clamp(0.0, 1.0);
            acc.add((p as f64).ln() * len);
        });
        acc.value()
    };
    core + fringe(y) - fringe(spec.x)
}

pub fn sigma_decomposition(
    spec: &IntervalSpec,
    trunc: TruncationLevel,
    table: &LambdaTable,
) -> Result<SigmaDecomposition> {
    if spec.x < 4 * spec.h {
        return Err(Error::Domain(format!(
            "sigma decomposition needs X >= 4H (X = {}, H = {})",
            spec.x, spec.h
        )));
    }
    if spec.end() > table.limit() {
        return Err(Error::range(
            "X + H",
            spec.end(),
            "X + H exceeds the lambda table limit",
        ));
    }
    let top = spec.x - 2 * spec.h;
    let fs: Vec<u64> = SquarefullIter::new(0, top, Some(trunc))?
        .map(|d| d.f)
        .collect();
    let h = spec.h as f64;
    let parts: Vec<(CompensatedSum, CompensatedSum)> = fs
        .par_chunks(64)
        .map(|chunk| {
            let mut fluct = CompensatedSum::new();
            let mut theta = CompensatedSum::new();
            for &f in chunk {
                fluct.add(smoothed_window(spec, f.isqrt(), table) - h);
                theta.merge(&table.theta_range(spec.x - f, spec.end() - f));
            }
            (fluct, theta)
        })
        .collect();
    let mut sigma1 = CompensatedSum::new();
    let mut theta = CompensatedSum::new();
    for (a, b) in &parts {
        sigma1.merge(a);
        theta.merge(b);
    }
    let count = count_squarefull(top, Some(trunc));
    debug_assert_eq!(count, fs.len() as u64);
    Ok(SigmaDecomposition {
        sigma1: sigma1.value(),
        sigma2: h * count as f64,
        count,
        restricted_theta_sum: theta.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingResidual {
    pub m: u64,
    pub f: u64,
    /// θ(X+H−f) − θ(X−f).
    pub lhs: f64,
    /// ∫_m^{m+1} [θ(X+H−u²) − θ(X−u²)] du.
    pub rhs: f64,
    pub residual: f64,
    /// m · log X.
    pub envelope: f64,
}

pub fn smoothing_residual(
    m: u64,
    f: u64,
    spec: &IntervalSpec,
    table: &LambdaTable,
) -> Result<SmoothingResidual> {
    if m == 0 || m * m > f || f >= (m + 1) * (m + 1) {
        return Err(Error::Domain(format!(
            "need m^2 <= f < (m+1)^2, got m = {m}, f = {f}"
        )));
    }
    if !is_squarefull(f)? {
        return Err(Error::Domain(format!("{f} is not square-full")));
    }
    if f + 2 * spec.h > spec.x {
        return Err(Error::Domain(format!("need f <= X - 2H, got f = {f}")));
    }
    if spec.end() > table.limit() {
        return Err(Error::range(
            "X + H",
            spec.end(),
            "X + H exceeds the lambda table limit",
        ));
    }
    let lhs = table.theta_range(spec.x - f, spec.end() - f).value();
    let rhs = smoothed_theta(spec.end(), m, table) - smoothed_theta(spec.x, m, table);
    Ok(SmoothingResidual {
        m,
        f,
        lhs,
        rhs,
        residual: lhs - rhs,
        envelope: m as f64 * (spec.x as f64).ln(),
    })
}

/// [`smoothing_residual`] for every square-full `f <= X − 2H` (optionally truncated).
pub fn smoothing_residuals(
    spec: &IntervalSpec,
    trunc: Option<TruncationLevel>,
    table: &LambdaTable,
) -> Result<Vec<SmoothingResidual>> {
    let top = spec.x.saturating_sub(2 * spec.h);
    if top == 0 {
        return Ok(Vec::new());
    }
    let fs: Vec<u64> = SquarefullIter::new(0, top, trunc)?.map(|d| d.f).collect();
    fs.par_iter()
        .map(|&f| smoothing_residual(f.isqrt(), f, spec, table))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueSample {
    pub x: u64,
    pub h: u64,
    pub sample_count: u64,
    pub seed: u64,
    /// Mean of ((θ(t+H) − θ(t) − H)/H)² over the sampled t ∈ [X, 2X].
    pub normalized_second_moment: f64,
    /// −log(moment)/log log X: the exponent A for which moment = (log X)^{−A}.
    pub log_exponent: f64,
}

/// Sample point `index` for `seed`: stream `index` of a ChaCha8 generator, so every
/// sample is a pure function of (seed, index).
fn sample_point(seed: u64, index: u64, x: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.gen_range(x..=2 * x)
}

pub fn mean_value_sample(x: u64, h: u64, sample_count: u64, seed: u64) -> Result<MeanValueSample> {
    if x < 2 {
        return Err(Error::range("X", x, "mean value sampling requires X >= 2"));
    }
    if h > x || (h as u128).pow(6) < x as u128 {
        return Err(Error::range(
            "H",
            h,
            "mean value sampling requires X^(1/6) <= H <= X",
        ));
    }
    if sample_count < 10 {
        return Err(Error::range(
            "sample_count",
            sample_count,
            "at least 10 samples are required",
        ));
    }
    let end = 2 * x + h;
    if end > SIEVE_MAX {
        return Err(Error::range(
            "2X + H",
            end,
            "sample windows must end at or below 2^62",
        ));
    }
    let base = BasePrimes::for_window_end(end);
    let hf = h as f64;
    let terms: Vec<f64> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let t = sample_point(seed, i, x);
            let theta = theta_between_with(t, h, &base)?.value();
            Ok(((theta - hf) / hf).powi(2))
        })
        .collect::<Result<_>>()?;
    let sum: CompensatedSum = terms.into_iter().sum();
    let moment = sum.value() / sample_count as f64;
    Ok(MeanValueSample {
        x,
        h,
        sample_count,
        seed,
        normalized_second_moment: moment,
        log_exponent: -moment.ln() / (x as f64).ln().ln(),
    })
}
