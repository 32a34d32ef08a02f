use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use dlv::expr::parse_expr;
use dlv::oracle::{self, OracleReport};
use dlv::pipeline::{self, Tower, VerificationReport};
use dlv::report;
use dlv::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;

const SYNOPSIS: &str = "usage:
  dlv verify --n N [--m M] [--m-max K] [--format text|json] [--out PATH]
  dlv sweep --n-range A..B [--m-max K] [--seed S] [--format text|json] [--out PATH]
  dlv oracle [--suite all|identity|bilinearity|forcing-order|enumeration]
             [--n-range A..B] [--m-max K] [--seed S] [--trials T] [--bound B]
             [--format text|json] [--out PATH]
  dlv pair --n N --expr EXPR";

#[derive(Debug, Parser)]
#[command(name = "dlv", version, about = "Exact divisor-lattice verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify h0(m D_n) = 1 for one odd n
    Verify {
        #[arg(long)]
        n: u64,
        /// Run a single instance instead of the whole range
        #[arg(long)]
        m: Option<u64>,
        /// Override the threshold; instances run for m = 1 ..= m_max + 1
        #[arg(long = "m-max")]
        m_max: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Verify every odd n in an inclusive range
    Sweep {
        #[arg(long = "n-range")]
        n_range: String,
        #[arg(long = "m-max")]
        m_max: Option<u64>,
        /// Accepted for symmetry with `oracle`; sweeps use no randomness
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run the independent oracle suites
    Oracle {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long = "n-range", default_value = "3..99")]
        n_range: String,
        #[arg(long = "m-max", default_value_t = 20)]
        m_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 10)]
        bound: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate an expression such as "(2*A - R).G_n"
    Pair {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        expr: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Identity,
    Bilinearity,
    ForcingOrder,
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

/// Oracle enumeration and order checks use small m, independent of --m-max.
const ENUMERATION_M_CAP: u64 = 4;
const ORDER_M_CAP: u64 = 5;

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}\n\n{SYNOPSIS}");
    ExitCode::from(EXIT_USAGE)
}

fn parse_n_range(text: &str) -> Result<Vec<u64>, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("--n-range expects A..B, got `{text}`"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("--n-range bound `{s}` is not a non-negative integer"))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a < 3 || a.is_multiple_of(2) || b.is_multiple_of(2) {
        return Err(format!(
            "--n-range bounds must be odd and at least 3, got {a}..{b}"
        ));
    }
    if a > b {
        return Err(format!("--n-range is empty: {a}..{b}"));
    }
    Ok((a..=b).step_by(2).collect())
}

fn emit(output: &Output, text: String, json: Option<&str>) -> Result<(), Error> {
    let body = match (output.format, json) {
        (Format::Json, Some(j)) => {
            if std::env::var("DLV_SCHEMA_CHECK").is_ok_and(|v| v == "1") {
                report::validate_str(j)?;
            }
            j.to_string()
        }
        _ => text,
    };
    match &output.out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn report_ok(r: &VerificationReport) -> bool {
    !r.has_failures()
}

fn run_verify(n: u64, m: Option<u64>, m_max: Option<u64>, output: &Output) -> Result<bool, Error> {
    let rep = match m {
        Some(m) => {
            let threshold = pipeline::m_threshold(n)?;
            let inst = Tower::new(n)?.verify(m)?;
            let summary = format!("n = {n}, m = {m}: {}", inst.status.label());
            VerificationReport {
                n,
                threshold,
                m_max: m,
                instances: vec![inst],
                y_prime_only: Vec::new(),
                summary,
                tool_version: pipeline::TOOL_VERSION.to_string(),
            }
        }
        None => pipeline::verify_all_with(n, m_max)?,
    };
    let json = report::to_json(&report::report_doc(&rep))?;
    emit(output, report::render_text(&rep), Some(&json))?;
    Ok(report_ok(&rep))
}

fn run_sweep(ns: &[u64], m_max: Option<u64>, output: &Output) -> Result<bool, Error> {
    let done = AtomicUsize::new(0);
    let total = ns.len();
    let reports: Vec<VerificationReport> = ns
        .par_iter()
        .map(|&n| {
            let r = pipeline::verify_all_with(n, m_max);
            if output.format == Format::Text {
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!("[{k}/{total}] n = {n}");
            }
            r
        })
        .collect::<Result<_, _>>()?;
    let text: String = reports
        .iter()
        .map(report::render_text)
        .collect::<Vec<_>>()
        .join("\n");
    let json = report::to_json(&report::sweep_doc(&reports))?;
    emit(output, text, Some(&json))?;
    // a Failed instance aborts the sweep's success status
    Ok(reports.iter().all(report_ok))
}

#[allow(clippy::too_many_arguments)]
fn run_oracle(
    suite: Suite,
    ns: &[u64],
    m_max: u64,
    seed: u64,
    trials: u64,
    bound: u64,
    output: &Output,
) -> Result<bool, Error> {
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut reports: Vec<OracleReport> = Vec::new();
    // identity failures must surface before anything else
    if want(Suite::Identity) {
        reports.push(oracle::identity_suite(ns, m_max, seed)?);
    }
    if want(Suite::Bilinearity) {
        reports.push(oracle::bilinearity_suite(trials, seed));
    }
    if want(Suite::ForcingOrder) {
        reports.push(oracle::forcing_order_suite(ns, ORDER_M_CAP)?);
    }
    if want(Suite::Enumeration) {
        reports.push(oracle::enumeration_suite(ns, ENUMERATION_M_CAP, bound)?);
    }
    let text: String = reports.iter().map(report::render_oracle_text).collect();
    let json = report::to_json(&report::oracle_run_doc(&reports))?;
    emit(output, text, Some(&json))?;
    Ok(reports.iter().all(OracleReport::passed))
}

fn run_pair(n: u64, expr: &str) -> Result<bool, Error> {
    let tower = Tower::new(n)?;
    let scope = tower.scope();
    let v = parse_expr(expr, &scope)?;
    println!("{}", scope.render(&v));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let outcome = match &cli.command {
        Command::Verify {
            n,
            m,
            m_max,
            output,
        } => {
            if let Err(e) = dlv::constructions::check_odd_parameter(*n) {
                return usage_error(e);
            }
            if *m == Some(0) {
                return usage_error("--m must be at least 1");
            }
            run_verify(*n, *m, *m_max, output)
        }
        Command::Sweep {
            n_range,
            m_max,
            output,
            ..
        } => match parse_n_range(n_range) {
            Ok(ns) => run_sweep(&ns, *m_max, output),
            Err(msg) => return usage_error(msg),
        },
        Command::Oracle {
            suite,
            n_range,
            m_max,
            seed,
            trials,
            bound,
            output,
        } => match parse_n_range(n_range) {
            Ok(ns) => run_oracle(*suite, &ns, *m_max, *seed, *trials, *bound, output),
            Err(msg) => return usage_error(msg),
        },
        Command::Pair { n, expr } => {
            if let Err(e) = dlv::constructions::check_odd_parameter(*n) {
                return usage_error(e);
            }
            match run_pair(*n, expr) {
                Err(e @ Error::MismatchedModel { .. }) => return usage_error(e),
                other => other,
            }
        }
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e @ (Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::Type { .. })) => {
            usage_error(e)
        }
        Err(e @ Error::InvalidParameter(_)) => usage_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
