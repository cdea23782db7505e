//! Command-line front end for the `kruskal` binary.
//!
//! `kruskal verify` reads a matrix file and prints one JSON report;
//! `kruskal bench` prints a CSV scaling table for the hashing verifiers.
//!
//! Exit codes: 0 at least `k`, 1 less than `k`, 2 usage or parse error,
//! 3 resource limit.

pub mod bench;
pub mod matrix_file;
pub mod report;

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::dp::verify_dp;
use crate::error::Error;
use crate::gf::mod_reduce_matrix;
use crate::oracle::oracle_verdict;
use crate::types::{ArithmeticMode, FingerprintWidth, Matrix, Verdict, VerifyConfig, DEFAULT_SEED};
use crate::verifiers::{coefficient_bound, verify_hash};
pub use bench::{run_bench, BenchArgs};
pub use matrix_file::{parse_matrix, parse_matrix_str, serialize_matrix, ParseError, ParsedMatrix};
pub use report::ReportRecord;

#[derive(Debug, Parser)]
#[command(name = "kruskal", version, about = "Kruskal rank verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the Kruskal rank of a matrix is at least k.
    Verify(VerifyArgs),
    /// Time the hashing verifier on random full-rank instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Hash,
    Dp,
    Oracle,
}

/// `gf2`, `gfq:<prime>` or `int`.
pub fn parse_field(s: &str) -> Result<ArithmeticMode, String> {
    match s {
        "gf2" => Ok(ArithmeticMode::Gf2),
        "int" => Ok(ArithmeticMode::Integer),
        _ => {
            let q = s
                .strip_prefix("gfq:")
                .ok_or_else(|| format!("unknown field {s:?}, expected gf2, gfq:<q> or int"))?;
            let q: u64 = q.parse().map_err(|_| format!("bad modulus {q:?}"))?;
            ArithmeticMode::gfq(q).map_err(|e| e.to_string())
        }
    }
}

fn parse_width(s: &str) -> Result<FingerprintWidth, String> {
    let bits: u32 = s.parse().map_err(|_| format!("bad width {s:?}"))?;
    FingerprintWidth::from_bits(bits).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_field)]
    pub field: ArithmeticMode,
    /// Rank threshold; optional with --find-rank.
    #[arg(long, required_unless_present = "find_rank")]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = AlgoArg::Hash)]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Coefficient bound M for --algo dp; defaults to ((k-1)! m^(k-1))^2.
    #[arg(long)]
    pub dp_bound: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Fingerprint width in bits, 64 or 128.
    #[arg(long, value_parser = parse_width, default_value = "128")]
    pub width: FingerprintWidth,
    /// Verify the transpose, i.e. work with rows instead of columns.
    #[arg(long)]
    pub transpose: bool,
    /// Report the Kruskal rank found by binary search over k.
    #[arg(long)]
    pub find_rank: bool,
    /// Leave elapsed_ms out of the report.
    #[arg(long)]
    pub no_timing: bool,
    pub path: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Verify(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(Error::Resource(_) | Error::Overflow(_)) => 3,
            _ => 2,
        }
    }
}

/// The matrix a verifier sees for `mode`: reduced to residues when needed.
fn prepare(
    parsed: &ParsedMatrix,
    mode: ArithmeticMode,
    transpose: bool,
) -> Result<Matrix, CliError> {
    let a = if transpose {
        parsed.matrix.transpose()
    } else {
        parsed.matrix.clone()
    };
    let Some(q) = mode.modulus() else {
        return Ok(a);
    };
    if (&parsed.scale % BigInt::from(q)).to_u64() == Some(0) {
        return Err(CliError::Usage(format!(
            "denominators are not invertible modulo {q} (scale {})",
            parsed.scale
        )));
    }
    Ok(mod_reduce_matrix(&a, q)?)
}

fn verify_once(a: &Matrix, args: &VerifyArgs, k: usize) -> Result<Verdict, CliError> {
    let mut cfg = VerifyConfig::new(k).with_seed(args.seed);
    cfg.threads = args.threads;
    cfg.fingerprint_width = args.width;
    match args.algo {
        AlgoArg::Hash => Ok(verify_hash(a, args.field, &cfg)?),
        AlgoArg::Oracle => Ok(oracle_verdict(a, args.field, &cfg)?),
        AlgoArg::Dp => {
            let bound = match args.dp_bound {
                Some(b) => b,
                None => coefficient_bound(k, a.entry_bound())
                    .value
                    .to_u64()
                    .ok_or_else(|| {
                        Error::Resource(format!(
                            "default dp bound for k = {k} exceeds 64 bits, pass --dp-bound"
                        ))
                    })?,
            };
            Ok(verify_dp(a, bound, &cfg)?)
        }
    }
}

/// Largest `k <= n` that passes, with the verdict at `k + 1` when `k < n`
/// (at `n` otherwise).
fn find_rank(a: &Matrix, args: &VerifyArgs) -> Result<(usize, Verdict), CliError> {
    let n = a.cols();
    let mut seen: HashMap<usize, Verdict> = HashMap::new();
    let mut run = |k: usize| -> Result<Verdict, CliError> {
        if let Some(v) = seen.get(&k) {
            return Ok(v.clone());
        }
        let v = verify_once(a, args, k)?;
        seen.insert(k, v.clone());
        Ok(v)
    };
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if run(mid)?.is_at_least() {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let v = run(if lo < n { lo + 1 } else { n })?;
    Ok((lo, v))
}

pub fn run_verify(args: &VerifyArgs) -> Result<ReportRecord, CliError> {
    if args.dp_bound.is_some() && args.algo != AlgoArg::Dp {
        return Err(CliError::Usage("--dp-bound requires --algo dp".into()));
    }
    if args.algo == AlgoArg::Dp && args.field != ArithmeticMode::Integer {
        return Err(CliError::Usage(
            "--algo dp supports only --field int".into(),
        ));
    }
    let parsed = parse_matrix(&args.path)?;
    let a = prepare(&parsed, args.field, args.transpose)?;
    let (rank, verdict) = if args.find_rank {
        let (r, v) = find_rank(&a, args)?;
        (Some(r), v)
    } else {
        let k = args.k.expect("clap requires k without --find-rank");
        (None, verify_once(&a, args, k)?)
    };
    let mut record = ReportRecord::new(
        &verdict,
        &a,
        args.field.to_string(),
        parsed.scale.to_string(),
        args.transpose,
        !args.no_timing,
    );
    record.kruskal_rank = rank;
    Ok(record)
}

/// Runs the binary on `argv`; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => run_verify(args).map(|r| {
            let _ = writeln!(out, "{}", r.to_json());
            r.exit_code()
        }),
        Command::Bench(args) => run_bench(args, out).map(|()| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
