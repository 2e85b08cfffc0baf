//! ζ(3/2), ζ(3), ζ(2/3) and ζ(2) by Euler–Maclaurin summation at high precision.
//!
//! For real `s ≠ 1` and integers `N, K ≥ 1`:
//!
//! ```text
//! ζ(s) = Σ_{n<N} n^{-s} + N^{1-s}/(s-1) + N^{-s}/2
//!        + Σ_{k=1}^{K} B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1} + R_K
//! ```
//!
//! and for real `s > -(2K+1)` the remainder is bounded by the first omitted term,
//! `|R_K| <= |T_{K+1}|`. The expansion is valid across the pole, so the same routine
//! yields ζ(2/3) < 0.

use std::sync::OnceLock;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Float = FBig<HalfEven>;

/// Working precision of the process-wide shared constants.
pub const DEFAULT_PRECISION_BITS: usize = 128;

const GUARD_BITS: usize = 32;

/// A real exponent `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Exponent {
    num: i64,
    den: u64,
}

/// ζ(s) at one argument: the value, its decimal expansion and the truncation bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub value: f64,
    pub decimal: String,
    pub truncation_bound: f64,
    pub terms_direct: u64,
    pub terms_bernoulli: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaConstants {
    pub zeta_3_2: f64,
    pub zeta_3: f64,
    pub zeta_2_3: f64,
    pub zeta_2: f64,
    /// ζ(3/2)/ζ(3), divided at working precision before rounding.
    pub leading_ratio: f64,
    pub precision_bits: usize,
    /// Decimal expansions at the requested precision.
    pub leading_ratio_decimal: String,
    pub details: ZetaDetails,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaDetails {
    pub zeta_3_2: ZetaValue,
    pub zeta_3: ZetaValue,
    pub zeta_2_3: ZetaValue,
    pub zeta_2: ZetaValue,
}

impl ZetaConstants {
    /// Constants computed once per process at [`DEFAULT_PRECISION_BITS`].
    pub fn shared() -> &'static ZetaConstants {
        static SHARED: OnceLock<ZetaConstants> = OnceLock::new();
        SHARED.get_or_init(|| {
            compute_zeta_constants(DEFAULT_PRECISION_BITS).expect("default precision is valid")
        })
    }

    /// Second-order coefficient ζ(2/3)/ζ(3).
    pub fn second_coefficient_zeta3(&self) -> f64 {
        self.zeta_2_3 / self.zeta_3
    }

    /// Second-order coefficient ζ(2/3)/ζ(2).
    pub fn second_coefficient_zeta2(&self) -> f64 {
        self.zeta_2_3 / self.zeta_2
    }

    /// Short stable identifier of the rounded constants, stamped into reports.
    pub fn fingerprint(&self) -> String {
        format!(
            "p{}:{:016x}:{:016x}:{:016x}",
            self.precision_bits,
            self.leading_ratio.to_bits(),
            self.zeta_2_3.to_bits(),
            self.zeta_2.to_bits()
        )
    }
}

pub fn compute_zeta_constants(precision_bits: usize) -> Result<ZetaConstants> {
    if precision_bits < 53 {
        return Err(Error::range(
            "precision_bits",
            precision_bits,
            "precision must be at least 53 bits",
        ));
    }
    let work = precision_bits + GUARD_BITS;
    let (z32, z32_info) = zeta_euler_maclaurin(Exponent { num: 3, den: 2 }, work, precision_bits);
    let (z3, z3_info) = zeta_euler_maclaurin(Exponent { num: 3, den: 1 }, work, precision_bits);
    let (z23, z23_info) = zeta_euler_maclaurin(Exponent { num: 2, den: 3 }, work, precision_bits);
    let (_, z2_info) = zeta_euler_maclaurin(Exponent { num: 2, den: 1 }, work, precision_bits);
    let _ = z23;
    let ratio = &z32 / &z3;
    Ok(ZetaConstants {
        zeta_3_2: z32_info.value,
        zeta_3: z3_info.value,
        zeta_2_3: z23_info.value,
        zeta_2: z2_info.value,
        leading_ratio: to_f64(&ratio),
        precision_bits,
        leading_ratio_decimal: to_decimal_string(&ratio, precision_bits),
        details: ZetaDetails {
            zeta_3_2: z32_info,
            zeta_3: z3_info,
            zeta_2_3: z23_info,
            zeta_2: z2_info,
        },
    })
}

fn float_int(n: u64, work: usize) -> Float {
    Float::from(UBig::from(n)).with_precision(work).value()
}

fn float_ratio(r: &RBig, work: usize) -> Float {
    let num = Float::from(r.numerator().clone())
        .with_precision(work)
        .value();
    let den = Float::from(IBig::from(r.denominator().clone()))
        .with_precision(work)
        .value();
    num / den
}

fn to_f64(x: &Float) -> f64 {
    x.to_f64().value()
}

/// Decimal digits carrying `bits` of precision.
fn to_decimal_string(x: &Float, bits: usize) -> String {
    let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    let d = x.to_decimal().value().with_precision(digits).value();
    d.to_string()
}

/// n^{-s} at working precision.
fn pow_neg(n: u64, s: Exponent, work: usize) -> Float {
    let one = float_int(1, work);
    let nf = float_int(n, work);
    if s.den == 1 {
        let p = nf.powi(IBig::from(s.num));
        one / p
    } else {
        let e = float_int(s.num as u64, work) / float_int(s.den, work);
        (-(nf.ln() * e)).exp()
    }
}

/// Even-index Bernoulli numbers B_0, B_2, …, B_{2k_max} (Akiyama–Tanigawa).
fn bernoulli_even(k_max: usize) -> Vec<RBig> {
    let n_max = 2 * k_max;
    let mut a: Vec<RBig> = Vec::with_capacity(n_max + 1);
    let mut out = Vec::with_capacity(k_max + 1);
    for m in 0..=n_max {
        a.push(RBig::from_parts(IBig::ONE, UBig::from(m as u64 + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * RBig::from(j as u64);
        }
        if m % 2 == 0 {
            out.push(a[0].clone());
        }
    }
    out
}

fn bernoulli_table() -> &'static Vec<RBig> {
    static TABLE: OnceLock<Vec<RBig>> = OnceLock::new();
    TABLE.get_or_init(|| bernoulli_even(MAX_BERNOULLI_TERMS as usize + 1))
}

const MAX_BERNOULLI_TERMS: u32 = 120;

/// Euler–Maclaurin evaluation of ζ(s) with `work` bits, targeting `target` bits.
fn zeta_euler_maclaurin(s: Exponent, work: usize, target: usize) -> (Float, ZetaValue) {
    let n_cut = (work as u64).max(16);
    let s_f = {
        let num = Float::from(IBig::from(s.num)).with_precision(work).value();
        num / float_int(s.den, work)
    };
    let one = float_int(1, work);

    let mut direct = float_int(0, work);
    for n in 1..n_cut {
        direct += pow_neg(n, s, work);
    }

    let n_pow_neg_s = pow_neg(n_cut, s, work);
    let nf = float_int(n_cut, work);
    let mut total = direct + &n_pow_neg_s * &nf / (&s_f - &one) + &n_pow_neg_s / float_int(2, work);

    // T_k = B_{2k}/(2k)! · (s)_{2k-1} · N^{-s-2k+1}
    let bern = bernoulli_table();
    let threshold = 2f64.powi(-(target as i32) - 8);
    let n_sq = &nf * &nf;
    let mut poch = s_f.clone(); // (s)_1
    let mut npow = &n_pow_neg_s / &nf; // N^{-s-1}
    let mut fact = float_int(2, work); // (2k)!
    let mut k = 1u32;
    let mut bound;
    loop {
        let b = float_ratio(&bern[k as usize], work);
        let term = &b / &fact * &poch * &npow;
        let mag = to_f64(&term).abs();
        if mag < threshold * to_f64(&total).abs() || k > MAX_BERNOULLI_TERMS {
            bound = mag;
            break;
        }
        total += term;
        // advance to k + 1
        let two_k = 2 * k as u64;
        poch = poch * (&s_f + float_int(two_k - 1, work)) * (&s_f + float_int(two_k, work));
        npow /= &n_sq;
        fact *= float_int((two_k + 1) * (two_k + 2), work);
        k += 1;
    }
    // Rounding of the O(N) working-precision operations.
    bound += to_f64(&total).abs() * 2f64.powi(-(work as i32)) * (n_cut as f64 + 4.0 * k as f64);
    let info = ZetaValue {
        value: to_f64(&total),
        decimal: to_decimal_string(&total, target),
        truncation_bound: bound,
        terms_direct: n_cut - 1,
        terms_bernoulli: k - 1,
    };
    (total, info)
}
