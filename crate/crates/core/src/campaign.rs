//! Verification campaigns: interval sums over a grid of X against the main term, and
//! the CSV/JSON reports they produce.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::asymptotics::main_term;
use crate::error::{Error, Result};
use crate::repr::{interval_sum_direct, interval_sum_rearranged, IntervalSpec, DEFAULT_EPSILON};
use crate::sieve::{LambdaTable, SWEEP_BUDGET};
use crate::squarefull::TruncationLevel;
use crate::zeta::ZetaConstants;

/// Rows with X at or below this are cross-checked against the direct route.
pub const DIRECT_CHECK_LIMIT: u64 = 10_000_000;

/// Relative tolerance for the direct/rearranged cross-check.
pub const ROUTE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_H_EXPONENT: f64 = 0.55;

const SIGNIFICANT_DIGITS: usize = 12;

/// How the truncation level B is chosen for each X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BRule {
    /// B = ⌈(log X)^4⌉.
    Log4,
    Fixed(f64),
}

impl BRule {
    pub fn level(&self, x: u64) -> Result<TruncationLevel> {
        match *self {
            BRule::Log4 => TruncationLevel::log4(x),
            BRule::Fixed(b) => TruncationLevel::new(b),
        }
    }
}

impl FromStr for BRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "log4" {
            return Ok(BRule::Log4);
        }
        s.parse::<f64>()
            .ok()
            .filter(|b| b.is_finite() && *b >= 1.0)
            .map(BRule::Fixed)
            .ok_or_else(|| {
                Error::Config(format!("B rule must be `log4` or a number >= 1, got `{s}`"))
            })
    }
}

impl fmt::Display for BRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BRule::Log4 => f.write_str("log4"),
            BRule::Fixed(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub x_grid: Vec<u64>,
    pub h_exponent: f64,
    pub b_rule: BRule,
    pub epsilon: f64,
    pub threads: usize,
    pub format: ReportFormat,
    pub output_path: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            x_grid: Vec::new(),
            h_exponent: DEFAULT_H_EXPONENT,
            b_rule: BRule::Log4,
            epsilon: DEFAULT_EPSILON,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            format: ReportFormat::Csv,
            output_path: None,
        }
    }
}

impl CampaignConfig {
    pub fn interval_length(&self, x: u64) -> u64 {
        (x as f64).powf(self.h_exponent).floor() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_exponent > 0.0 && self.h_exponent < 1.0) {
            return Err(Error::Config(format!(
                "h_exponent {} must lie in (0, 1)",
                self.h_exponent
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!(
                "epsilon {} must lie in (0, 1/2)",
                self.epsilon
            )));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if let BRule::Fixed(b) = self.b_rule {
            TruncationLevel::new(b).map_err(|e| Error::Config(e.to_string()))?;
        }
        for &x in &self.x_grid {
            let h = self.interval_length(x);
            if h < 4 || h > x {
                return Err(Error::Config(format!(
                    "X = {x} gives H = {h}, outside 4 <= H <= X"
                )));
            }
            if x + h > SWEEP_BUDGET {
                return Err(Error::Config(format!("X = {x} exceeds the sieve budget")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    Rearranged,
    /// Rearranged value, cross-checked against the direct route.
    Both,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Rearranged => "rearranged",
            Route::Both => "both",
        })
    }
}

pub const STATUS_OK: &str = "ok";

/// One campaign datapoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(
        rename = "B",
        serialize_with = "sig12",
        deserialize_with = "nullable_f64"
    )]
    pub b: f64,
    #[serde(serialize_with = "sig12", deserialize_with = "nullable_f64")]
    pub computed_sum: f64,
    #[serde(serialize_with = "sig12", deserialize_with = "nullable_f64")]
    pub main_term: f64,
    /// |computed_sum / main_term − 1|.
    #[serde(serialize_with = "sig12", deserialize_with = "nullable_f64")]
    pub rel_error: f64,
    /// rel_error · log X.
    #[serde(serialize_with = "sig12", deserialize_with = "nullable_f64")]
    pub log_x_normalized_error: f64,
    pub route: Route,
    pub wall_time_ms: u64,
    pub constants_fingerprint: String,
    pub status: String,
}

impl VerificationRow {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    /// Copy with every float rounded to the report's 12 significant digits.
    pub fn rounded(&self) -> Self {
        Self {
            b: round_sig(self.b),
            computed_sum: round_sig(self.computed_sum),
            main_term: round_sig(self.main_term),
            rel_error: round_sig(self.rel_error),
            log_x_normalized_error: round_sig(self.log_x_normalized_error),
            ..self.clone()
        }
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

fn nullable_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn run_row(x: u64, config: &CampaignConfig, constants: &ZetaConstants) -> VerificationRow {
    let start = Instant::now();
    let h = config.interval_length(x);
    let mut row = VerificationRow {
        x,
        h,
        b: f64::NAN,
        computed_sum: f64::NAN,
        main_term: f64::NAN,
        rel_error: f64::NAN,
        log_x_normalized_error: f64::NAN,
        route: Route::Rearranged,
        wall_time_ms: 0,
        constants_fingerprint: constants.fingerprint(),
        status: STATUS_OK.to_string(),
    };
    let outcome = (|| -> Result<()> {
        let spec = IntervalSpec::with_epsilon(x, h, config.epsilon)?;
        let trunc = config.b_rule.level(x)?;
        row.b = trunc.value();
        row.main_term = main_term(&spec, constants);
        let sum = interval_sum_rearranged(&spec, Some(trunc))?.value;
        row.computed_sum = sum;
        row.rel_error = (sum / row.main_term - 1.0).abs();
        row.log_x_normalized_error = row.rel_error * (x as f64).ln();
        if x <= DIRECT_CHECK_LIMIT {
            let table = LambdaTable::build(spec.end())?;
            let direct = interval_sum_direct(&spec, Some(trunc), &table)?.value;
            row.route = Route::Both;
            let delta = (direct - sum).abs() / sum.abs();
            if delta > ROUTE_TOLERANCE {
                row.status = format!("route mismatch: relative delta {delta:e}");
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = format!("error: {e}");
    }
    row.wall_time_ms = start.elapsed().as_millis() as u64;
    row
}

/// Runs every grid point (sorted by X) on a pool of `config.threads` workers. Row-level
/// failures are recorded in the row's status; only configuration errors abort.
pub fn run_campaign(config: &CampaignConfig) -> Result<Vec<VerificationRow>> {
    config.validate()?;
    let constants = ZetaConstants::shared();
    let mut grid = config.x_grid.clone();
    grid.sort_unstable();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|&x| run_row(x, config, constants))
            .collect()
    }))
}

/// Renders rows as CSV (fixed header, field order of [`VerificationRow`]) or a JSON array.
pub fn render_report(rows: &[VerificationRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                w.write_record(CSV_HEADER).map_err(ser_err)?;
            }
            for row in rows {
                w.serialize(row.rounded()).map_err(ser_err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Serialization(e.to_string()))?;
            String::from_utf8(bytes).map_err(ser_err)
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(ser_err)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "X",
    "H",
    "B",
    "computed_sum",
    "main_term",
    "rel_error",
    "log_x_normalized_error",
    "route",
    "wall_time_ms",
    "constants_fingerprint",
    "status",
];

fn ser_err(e: impl fmt::Display) -> Error {
    Error::Serialization(e.to_string())
}

/// Writes the report to `path` (overwriting) or to stdout when `path` is `None`.
pub fn emit_report(
    rows: &[VerificationRow],
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<()> {
    let text = render_report(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<VerificationRow>> {
    match format {
        ReportFormat::Json => serde_json::from_str(text).map_err(ser_err),
        ReportFormat::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(ser_err),
    }
}
