//! Subcommand front end over the library. Machine data goes to stdout (or
//! --out); prose goes to stderr. Exit codes: 0 success, 1 failed
//! reproduction verdicts, 2 usage or domain errors, 3 range, resource, or
//! IO errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nicolas_lab::error_term::{bigo_via_integral, e};
use nicolas_lab::nicolas::{exact_holds, exact_margin, nicolas_holds_with};
use nicolas_lab::prime_engine::{PrimeStream, SieveConfig};
use nicolas_lab::scanner::{
    default_scan_tail_limit, fmt_json_num, fmt_sci, reproduce, row_at, scan_with_options,
    write_csv, write_json, CheckpointMode, ScanConfig, ScanOptions,
};
use nicolas_lab::Error;

#[derive(Parser)]
#[command(
    name = "nicolas-lab",
    version,
    about = "Prime sums, the Mertens error term, and the Nicolas inequality at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Data output format.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    /// Significant digits for numeric output (2..=17).
    #[arg(long, global = true, default_value_t = 17)]
    precision: usize,

    /// Worker threads for segment sieving; data output is identical for
    /// every value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Prime cache file, used by `primes` and `scan`. The NICOLAS_LAB_CACHE
    /// environment variable overrides this flag.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Stream every prime up to a limit.
    Primes {
        #[arg(long)]
        limit: u64,
    },
    /// One full checkpoint row at an abscissa.
    Table {
        #[arg(long)]
        x: u64,
        /// Sieve reach for the tail interval; default max(10^7, 10x).
        #[arg(long)]
        tail_limit: Option<u64>,
    },
    /// The inequality verdict at an abscissa.
    Nicolas {
        #[arg(long)]
        x: u64,
        /// Evaluate from the exact integer products instead (x <= 100).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        tail_limit: Option<u64>,
    },
    /// The Mertens error term by definition and by the integral route.
    ErrorTerm {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1e7)]
        tail_limit: f64,
    },
    /// Run the named reproduction suite; exits 1 if any verdict fails.
    Reproduce {
        #[arg(long, default_value_t = 10_000_000)]
        prime_limit: u64,
    },
    /// Evaluate every checkpoint quantity over a range.
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// every-prime, geometric:RATIO, or explicit:X1,X2,...
        #[arg(long, default_value = "every-prime")]
        grid: String,
        /// Sieve reach for tail intervals; default max(10^7, 10 * TO).
        #[arg(long)]
        tail_limit: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Domain(_) | Error::Precision(_) => ExitCode::from(2),
                Error::Range(_) | Error::Resource(_) | Error::Io(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    if !(2..=17).contains(&cli.precision) {
        return Err(Error::Domain(format!(
            "--precision must be between 2 and 17, got {}",
            cli.precision
        )));
    }
    let cache = std::env::var_os("NICOLAS_LAB_CACHE")
        .map(PathBuf::from)
        .or_else(|| cli.cache.clone());
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    let sig = cli.precision;

    match &cli.command {
        Command::Primes { limit } => {
            let mut config = SieveConfig::new(*limit);
            if let Some(path) = &cache {
                config = config.with_cache(path.clone());
            }
            let stream = PrimeStream::with_threads(config, cli.threads.max(1))?;
            match cli.format {
                Format::Csv => {
                    for p in stream {
                        writeln!(out, "{p}")?;
                    }
                }
                Format::Json => {
                    write!(out, "[")?;
                    for (i, p) in stream.enumerate() {
                        if i > 0 {
                            write!(out, ",")?;
                        }
                        write!(out, "{p}")?;
                    }
                    writeln!(out, "]")?;
                }
            }
        }

        Command::Table { x, tail_limit } => {
            let tail = tail_limit.unwrap_or_else(|| default_scan_tail_limit(*x));
            let row = row_at(*x, tail)?;
            match cli.format {
                Format::Csv => write_csv(&[row], sig, &mut out)?,
                Format::Json => write_json(&[row], sig, &mut out)?,
            }
            eprintln!("table: x = {x}, tail sums cut at {tail}");
        }

        Command::Nicolas {
            x,
            exact,
            tail_limit,
        } => {
            if *exact {
                let (margin, holds) = if *x == 2 {
                    (f64::NAN, exact_holds(2)?)
                } else {
                    let m = exact_margin(*x)?;
                    (m, m > 0.0)
                };
                match cli.format {
                    Format::Csv => {
                        writeln!(out, "x,margin,holds")?;
                        writeln!(out, "{x},{},{holds}", fmt_sci(margin, sig))?;
                    }
                    Format::Json => {
                        writeln!(
                            out,
                            "{{\"x\": {x}, \"margin\": {}, \"holds\": {holds}}}",
                            fmt_json_num(margin, sig)
                        )?;
                    }
                }
                eprintln!("nicolas: x = {x}, exact integer-product route");
            } else {
                let tail = tail_limit.unwrap_or_else(|| default_scan_tail_limit(*x));
                let v = nicolas_holds_with(*x as f64, tail as f64)?;
                match cli.format {
                    Format::Csv => {
                        writeln!(
                            out,
                            "x,margin,holds,c_x_log,epsilon_x,theta_side,e_value,b_value,b_radius"
                        )?;
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{}",
                            v.x,
                            fmt_sci(v.margin, sig),
                            v.holds,
                            fmt_sci(v.c_x_log, sig),
                            fmt_sci(v.epsilon_x, sig),
                            v.theta_side,
                            fmt_sci(v.e_value, sig),
                            fmt_sci(v.b_interval.value, sig),
                            fmt_sci(v.b_interval.radius, sig),
                        )?;
                    }
                    Format::Json => {
                        writeln!(
                            out,
                            "{{\"x\": {}, \"margin\": {}, \"holds\": {}, \"c_x_log\": {}, \"epsilon_x\": {}, \"theta_side\": {}, \"e_value\": {}, \"b_value\": {}, \"b_radius\": {}}}",
                            v.x,
                            fmt_json_num(v.margin, sig),
                            v.holds,
                            fmt_json_num(v.c_x_log, sig),
                            fmt_json_num(v.epsilon_x, sig),
                            v.theta_side,
                            fmt_json_num(v.e_value, sig),
                            fmt_json_num(v.b_interval.value, sig),
                            fmt_json_num(v.b_interval.radius, sig),
                        )?;
                    }
                }
                eprintln!("nicolas: x = {x}, tail sums cut at {tail}");
            }
        }

        Command::ErrorTerm { x, tail_limit } => {
            let direct = e(*x)?;
            let interval = bigo_via_integral(*x, *tail_limit)?;
            let contains = interval.contains(direct);
            match cli.format {
                Format::Csv => {
                    writeln!(out, "x,e_value,integral_value,integral_radius,contains")?;
                    writeln!(
                        out,
                        "{},{},{},{},{contains}",
                        fmt_sci(*x, sig),
                        fmt_sci(direct, sig),
                        fmt_sci(interval.value, sig),
                        fmt_sci(interval.radius, sig),
                    )?;
                }
                Format::Json => {
                    writeln!(
                        out,
                        "{{\"x\": {}, \"e_value\": {}, \"integral_value\": {}, \"integral_radius\": {}, \"contains\": {contains}}}",
                        fmt_json_num(*x, sig),
                        fmt_json_num(direct, sig),
                        fmt_json_num(interval.value, sig),
                        fmt_json_num(interval.radius, sig),
                    )?;
                }
            }
            eprintln!("error-term: x = {x}, integral cut at {tail_limit}");
        }

        Command::Reproduce { prime_limit } => {
            let verdicts = reproduce(*prime_limit)?;
            let failed = verdicts.iter().filter(|v| !v.pass).count();
            match cli.format {
                Format::Csv => {
                    writeln!(out, "name,value,target,pass,note")?;
                    for v in &verdicts {
                        writeln!(
                            out,
                            "{},{},\"{}\",{},\"{}\"",
                            v.name,
                            fmt_sci(v.value, sig),
                            v.target,
                            v.pass,
                            v.note,
                        )?;
                    }
                }
                Format::Json => {
                    writeln!(out, "[")?;
                    for (i, v) in verdicts.iter().enumerate() {
                        let comma = if i + 1 < verdicts.len() { "," } else { "" };
                        writeln!(
                            out,
                            "  {{\"name\": \"{}\", \"value\": {}, \"target\": \"{}\", \"pass\": {}, \"note\": \"{}\"}}{}",
                            v.name,
                            fmt_json_num(v.value, sig),
                            v.target,
                            v.pass,
                            v.note,
                            comma,
                        )?;
                    }
                    writeln!(out, "]")?;
                }
            }
            eprintln!(
                "reproduce: {} verdicts, {} passed, {} failed (prime limit {})",
                verdicts.len(),
                verdicts.len() - failed,
                failed,
                prime_limit
            );
            if failed > 0 {
                for v in verdicts.iter().filter(|v| !v.pass) {
                    eprintln!("  FAILED {}: {} (target {})", v.name, v.value, v.target);
                }
                out.flush()?;
                return Ok(ExitCode::from(1));
            }
        }

        Command::Scan {
            from,
            to,
            grid,
            tail_limit,
        } => {
            let mut config = ScanConfig::new(*from, *to);
            config.mode = parse_grid(grid)?;
            if let Some(tail) = tail_limit {
                config.prime_limit_for_tails = *tail;
            }
            let opts = ScanOptions {
                threads: cli.threads.max(1),
                cache: cache.clone(),
            };
            let report = scan_with_options(&config, &opts)?;
            match cli.format {
                Format::Csv => write_csv(&report.checkpoints, sig, &mut out)?,
                Format::Json => write_json(&report.checkpoints, sig, &mut out)?,
            }
            eprintln!(
                "scan: [{}, {}], {} rows, tail sums cut at {}",
                report.x_min,
                report.x_max,
                report.checkpoints.len(),
                report.prime_limit_for_tails
            );
            if report.sign_events.is_empty() {
                eprintln!("scan: no sign changes");
            }
            for ev in &report.sign_events {
                eprintln!(
                    "scan: SIGN CHANGE {} at x = {}: {} -> {}",
                    ev.quantity, ev.x, ev.old_sign, ev.new_sign
                );
            }
            for t in &report.empirical_thresholds {
                let held = if t.held_from_start {
                    "held from start".to_string()
                } else {
                    match t.first_x {
                        Some(x) => format!("holds from x = {x}"),
                        None => "never settled".to_string(),
                    }
                };
                eprintln!(
                    "scan: {} {} (checked to {}); {}",
                    t.claim, held, t.checked_to, t.note
                );
            }
            eprintln!(
                "scan: margin route divergence {:.3e} at x = {}",
                report.margin_route_divergence, report.margin_route_divergence_at
            );
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(grid: &str) -> Result<CheckpointMode, Error> {
    if grid == "every-prime" {
        return Ok(CheckpointMode::EveryPrime);
    }
    if let Some(ratio) = grid.strip_prefix("geometric:") {
        let ratio: f64 = ratio
            .parse()
            .map_err(|_| Error::Domain(format!("bad geometric ratio in --grid {grid}")))?;
        return Ok(CheckpointMode::Geometric(ratio));
    }
    if let Some(list) = grid.strip_prefix("explicit:") {
        let points: Result<Vec<u64>, _> = list.split(',').map(str::parse).collect();
        let points =
            points.map_err(|_| Error::Domain(format!("bad explicit list in --grid {grid}")))?;
        return Ok(CheckpointMode::Explicit(points));
    }
    Err(Error::Domain(format!(
        "--grid must be every-prime, geometric:RATIO, or explicit:X1,X2,...; got {grid}"
    )))
}
