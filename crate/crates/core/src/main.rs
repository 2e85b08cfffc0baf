use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sqfull_core::asymptotics::{
    main_term, mean_value_sample, qx_fit, sigma_decomposition, window_fit, SecondTermVariant,
};
use sqfull_core::campaign::{
    emit_report, run_campaign, BRule, CampaignConfig, ReportFormat, DEFAULT_H_EXPONENT,
};
use sqfull_core::error::{Error, Result};
use sqfull_core::repr::{
    interval_sum_direct, interval_sum_rearranged, repr_sqfull, repr_truncated, IntervalSpec,
    DEFAULT_EPSILON,
};
use sqfull_core::sieve::{sieve_segment, LambdaTable, DEFAULT_SEGMENT_WIDTH};
use sqfull_core::squarefull::{count_squarefull, decompose, SquarefullIter, TruncationLevel};
use sqfull_core::sum::CompensatedSum;
use sqfull_core::zeta::{compute_zeta_constants, ZetaConstants, DEFAULT_PRECISION_BITS};

#[derive(Parser)]
#[command(
    name = "sqfull",
    version,
    about = "Primes plus square-full numbers: sums, counts and checks"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zeta constants as JSON.
    Constants {
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision_bits: usize,
    },
    /// Primes or θ over (lo, hi].
    Sieve {
        #[arg(long, value_parser = parse_u64)]
        lo: u64,
        #[arg(long, value_parser = parse_u64)]
        hi: u64,
        #[arg(long, value_enum, default_value_t = Emit::Primes)]
        emit: Emit,
    },
    #[command(subcommand)]
    Squarefull(SquarefullCommand),
    /// R(N) for one N, or the sum over X < N <= X+H.
    Repr(ReprArgs),
    #[command(subcommand)]
    Asym(AsymCommand),
    /// Run the verification campaign.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Primes,
    Theta,
}

#[derive(Subcommand)]
enum SquarefullCommand {
    /// Square-full f in (lo, hi] as f,a,b.
    List {
        #[arg(long, value_parser = parse_u64)]
        lo: u64,
        #[arg(long, value_parser = parse_u64)]
        hi: u64,
        #[arg(long = "B")]
        b: Option<f64>,
    },
    /// Q(x) or Q_B(x).
    Count {
        #[arg(long, value_parser = parse_u64)]
        x: u64,
        #[arg(long = "B")]
        b: Option<f64>,
    },
    Decompose {
        #[arg(long, value_parser = parse_u64)]
        f: u64,
    },
}

#[derive(Args)]
struct ReprArgs {
    #[arg(long = "N", value_parser = parse_u64, conflicts_with_all = ["x", "h"])]
    n: Option<u64>,
    #[arg(long = "X", value_parser = parse_u64, requires = "h")]
    x: Option<u64>,
    #[arg(long = "H", value_parser = parse_u64, requires = "x")]
    h: Option<u64>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long, value_enum, default_value_t = RouteArg::Both)]
    route: RouteArg,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RouteArg {
    Direct,
    Rearranged,
    Both,
}

#[derive(Subcommand)]
enum AsymCommand {
    /// ζ(3/2)/ζ(3) · H · X^{1/2}.
    MainTerm {
        #[arg(long = "X", value_parser = parse_u64)]
        x: u64,
        #[arg(long = "H", value_parser = parse_u64)]
        h: u64,
    },
    /// Exact Q(x) against the two-term asymptotic.
    QxFit {
        #[arg(long, value_delimiter = ',', value_parser = parse_u64, required = true)]
        x_grid: Vec<u64>,
        /// Second-term variant; defaults to the calibrated one.
        #[arg(long)]
        variant: Option<SecondTermVariant>,
    },
    /// Exact Q(x+H) − Q(x) against its prediction.
    WindowFit {
        #[arg(long, value_parser = parse_u64)]
        x: u64,
        #[arg(long = "H", value_parser = parse_u64)]
        h: u64,
    },
    Sigma {
        #[arg(long = "X", value_parser = parse_u64)]
        x: u64,
        #[arg(long = "H", value_parser = parse_u64)]
        h: u64,
        #[arg(long = "B")]
        b: f64,
    },
    Meanvalue {
        #[arg(long = "X", value_parser = parse_u64)]
        x: u64,
        #[arg(long = "H", value_parser = parse_u64)]
        h: u64,
        #[arg(long, default_value_t = 100)]
        samples: u64,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated X values; an empty list gives an empty report.
    #[arg(long, default_value = "1e6,1e7,1e8,1e9")]
    x_grid: String,
    #[arg(long, default_value_t = DEFAULT_H_EXPONENT)]
    h_exponent: f64,
    /// `log4` or a fixed B >= 1.
    #[arg(long = "B", default_value = "log4")]
    b_rule: String,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

/// Integers, also written as `1e9` or `10^9`.
fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let scaled = |m: &str, base: u64, e: &str| -> Option<u64> {
        m.parse::<u64>()
            .ok()?
            .checked_mul(base.checked_pow(e.parse().ok()?)?)
    };
    let parsed = if let Some((m, e)) = s.split_once(['e', 'E']) {
        scaled(m, 10, e)
    } else if let Some((b, e)) = s.split_once('^') {
        b.parse().ok().and_then(|b| scaled("1", b, e))
    } else {
        None
    };
    parsed.ok_or_else(|| format!("`{s}` is not a non-negative integer"))
}

struct Output {
    format: ReportFormat,
    sink: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl Output {
    fn open(format: ReportFormat, path: Option<PathBuf>) -> Result<Self> {
        let sink: Box<dyn Write> = match &path {
            Some(p) => Box::new(std::fs::File::create(p).map_err(|source| Error::Io {
                path: p.clone(),
                source,
            })?),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Self { format, sink, path })
    }

    fn io_err(&self, source: std::io::Error) -> Error {
        Error::Io {
            path: self
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
        writeln!(self.sink, "{text}").map_err(|e| self.io_err(e))
    }

    /// Rows as CSV with a header, or as a JSON array.
    fn rows<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        match self.format {
            ReportFormat::Json => self.json(&rows),
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in rows {
                    w.serialize(row)
                        .map_err(|e| Error::Serialization(e.to_string()))?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| Error::Serialization(e.to_string()))?;
                self.sink.write_all(&bytes).map_err(|e| self.io_err(e))
            }
        }
    }

    /// A single number: a bare line in CSV mode, a JSON number otherwise.
    fn scalar(&mut self, value: impl Serialize + std::fmt::Display) -> Result<()> {
        match self.format {
            ReportFormat::Json => self.json(&value),
            ReportFormat::Csv => writeln!(self.sink, "{value}").map_err(|e| self.io_err(e)),
        }
    }
}

fn trunc(b: Option<f64>) -> Result<Option<TruncationLevel>> {
    b.map(TruncationLevel::new).transpose()
}

fn sieve(lo: u64, hi: u64, emit: Emit, out: &mut Output) -> Result<()> {
    if hi < lo {
        return Err(Error::Config(format!("--hi {hi} is below --lo {lo}")));
    }
    let mut primes = Vec::new();
    let mut theta = CompensatedSum::new();
    let mut take = |p: u64| match emit {
        Emit::Primes => primes.push(p),
        Emit::Theta => theta.add((p as f64).ln()),
    };
    if lo < 2 && hi >= 2 {
        take(2);
    }
    let mut start = lo.max(2);
    while start < hi {
        let end = hi.min(start + DEFAULT_SEGMENT_WIDTH);
        sieve_segment(start, end)?.primes().for_each(&mut take);
        start = end;
    }
    match emit {
        Emit::Primes => match out.format {
            ReportFormat::Json => out.json(&primes),
            ReportFormat::Csv => {
                let text: String = primes.iter().map(|p| format!("{p}\n")).collect();
                out.sink
                    .write_all(text.as_bytes())
                    .map_err(|e| out.io_err(e))
            }
        },
        Emit::Theta => out.scalar(theta.value()),
    }
}

#[derive(Serialize)]
struct ReprOutput {
    value: f64,
    term_count: Option<u64>,
    /// |direct − rearranged| / |direct| when both routes ran.
    route_delta: Option<f64>,
}

fn repr(args: &ReprArgs, out: &mut Output) -> Result<()> {
    let trunc = trunc(args.b)?;
    let result = match (args.n, args.x, args.h) {
        (Some(n), _, _) => {
            let table = LambdaTable::build(n.saturating_sub(1).max(2))?;
            let v = match trunc {
                Some(t) => repr_truncated(n, t, &table)?,
                None => repr_sqfull(n, &table)?,
            };
            ReprOutput {
                value: v.value,
                term_count: Some(v.term_count),
                route_delta: None,
            }
        }
        (None, Some(x), Some(h)) => {
            let spec = IntervalSpec::new(x, h)?;
            let direct = || -> Result<_> {
                let table = LambdaTable::build(spec.end())?;
                interval_sum_direct(&spec, trunc, &table)
            };
            match args.route {
                RouteArg::Direct => {
                    let d = direct()?;
                    ReprOutput {
                        value: d.value,
                        term_count: d.term_count,
                        route_delta: None,
                    }
                }
                RouteArg::Rearranged => ReprOutput {
                    value: interval_sum_rearranged(&spec, trunc)?.value,
                    term_count: None,
                    route_delta: None,
                },
                RouteArg::Both => {
                    let d = direct()?;
                    let r = interval_sum_rearranged(&spec, trunc)?;
                    ReprOutput {
                        value: d.value,
                        term_count: d.term_count,
                        route_delta: Some((d.value - r.value).abs() / d.value.abs()),
                    }
                }
            }
        }
        _ => {
            return Err(Error::Config(
                "repr needs either --N or both --X and --H".into(),
            ))
        }
    };
    out.json(&result)
}

#[derive(Serialize)]
struct MainTermRow {
    x: u64,
    h: u64,
    main_term: f64,
}

fn asym(command: &AsymCommand, seed: u64, out: &mut Output) -> Result<()> {
    let constants = ZetaConstants::shared();
    match *command {
        AsymCommand::MainTerm { x, h } => {
            let spec = IntervalSpec::new(x, h)?;
            out.rows(&[MainTermRow {
                x,
                h,
                main_term: main_term(&spec, constants),
            }])
        }
        AsymCommand::QxFit {
            ref x_grid,
            variant,
        } => {
            let variant = variant.unwrap_or_else(SecondTermVariant::calibrated);
            let fits = x_grid
                .iter()
                .map(|&x| qx_fit(x, constants, variant))
                .collect::<Result<Vec<_>>>()?;
            out.rows(&fits)
        }
        AsymCommand::WindowFit { x, h } => out.rows(&[window_fit(x, h, constants)?]),
        AsymCommand::Sigma { x, h, b } => {
            let spec = IntervalSpec::new(x, h)?;
            let table = LambdaTable::build(spec.end())?;
            out.rows(&[sigma_decomposition(
                &spec,
                TruncationLevel::new(b)?,
                &table,
            )?])
        }
        AsymCommand::Meanvalue { x, h, samples } => {
            out.rows(&[mean_value_sample(x, h, samples, seed)?])
        }
    }
}

/// Returns whether every row succeeded.
fn verify(args: &VerifyArgs, cli: &Cli) -> Result<bool> {
    let mut config = CampaignConfig {
        x_grid: args
            .x_grid
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_u64(s).map_err(Error::Config))
            .collect::<Result<_>>()?,
        h_exponent: args.h_exponent,
        b_rule: args.b_rule.parse::<BRule>()?,
        epsilon: args.epsilon,
        format: cli.format,
        output_path: cli.out.clone(),
        ..Default::default()
    };
    if let Some(t) = cli.threads {
        config.threads = t;
    }
    let rows = run_campaign(&config)?;
    emit_report(&rows, config.format, config.output_path.as_deref())?;
    Ok(rows.iter().all(|r| r.is_ok()))
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Command::Verify(args) = &cli.command {
        return verify(args, cli);
    }
    let mut out = Output::open(cli.format, cli.out.clone())?;
    match &cli.command {
        Command::Constants { precision_bits } => {
            let constants = if *precision_bits == DEFAULT_PRECISION_BITS {
                ZetaConstants::shared().clone()
            } else {
                compute_zeta_constants(*precision_bits)?
            };
            out.json(&constants)?;
        }
        Command::Sieve { lo, hi, emit } => sieve(*lo, *hi, *emit, &mut out)?,
        Command::Squarefull(SquarefullCommand::List { lo, hi, b }) => {
            let rows: Vec<_> = SquarefullIter::new(*lo, *hi, trunc(*b)?)?.collect();
            out.rows(&rows)?;
        }
        Command::Squarefull(SquarefullCommand::Count { x, b }) => {
            out.scalar(count_squarefull(*x, trunc(*b)?))?
        }
        Command::Squarefull(SquarefullCommand::Decompose { f }) => out.rows(&[decompose(*f)?])?,
        Command::Repr(args) => repr(args, &mut out)?,
        Command::Asym(command) => asym(command, cli.seed, &mut out)?,
        Command::Verify(_) => unreachable!(),
    }
    out.sink.flush().map_err(|e| out.io_err(e))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } | Error::Resource { .. } | Error::Serialization(_) => {
                    ExitCode::from(1)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}
