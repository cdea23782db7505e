use std::io::Write;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_field, CliError};
use crate::error::Error;
use crate::gf::derive_seed;
use crate::types::{ArithmeticMode, Matrix, VerifyConfig, DEFAULT_SEED};
use crate::verifiers::verify_hash;

/// Instances drawn per trial before giving up on a full-rank one.
const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// `gf2` or `gfq:<prime>`.
    #[arg(long, value_parser = parse_field, default_value = "gf2")]
    pub field: ArithmeticMode,
    /// Comma-separated list of k values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    /// Comma-separated list of column counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Rows of each random instance.
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
}

/// Averages for one `(n, k)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub mean_combinations: f64,
    pub mean_ms: f64,
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, q: u64) -> Matrix {
    let entries = (0..rows * cols)
        .map(|_| rng.gen_range(0..q) as i64)
        .collect();
    Matrix::new(rows, cols, entries).expect("positive shape")
}

/// Runs `trials` instances of shape `rows x n`, redrawing each until the
/// verifier reports at least `k`.
pub fn bench_cell(
    mode: ArithmeticMode,
    rows: usize,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<BenchRow, Error> {
    let q = mode
        .modulus()
        .ok_or_else(|| Error::Argument("bench runs over gf2 or gfq:<q> only".into()))?;
    let cell_seed = derive_seed(derive_seed(seed, n as u64), k as u64);
    let (mut combos, mut nanos) = (0u128, 0u128);
    for t in 0..trials {
        let trial_seed = derive_seed(cell_seed, t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let cfg = VerifyConfig::new(k).with_seed(trial_seed);
        let mut attempt = 0;
        let verdict = loop {
            if attempt == MAX_ATTEMPTS {
                return Err(Error::Resource(format!(
                    "no instance of shape {rows}x{n} over {mode} passed k = {k} in {MAX_ATTEMPTS} draws"
                )));
            }
            attempt += 1;
            let a = random_matrix(&mut rng, rows, n, q);
            let v = verify_hash(&a, mode, &cfg)?;
            if v.is_at_least() {
                break v;
            }
        };
        combos += verdict.stats.combinations as u128;
        nanos += verdict.elapsed.as_nanos();
    }
    let div = trials.max(1) as f64;
    Ok(BenchRow {
        n,
        k,
        trials,
        mean_combinations: combos as f64 / div,
        mean_ms: nanos as f64 / 1e6 / div,
    })
}

/// CSV with columns `field,n,k,trials,mean_combinations,mean_ms`.
pub fn run_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.field == ArithmeticMode::Integer {
        return Err(CliError::Usage(
            "bench supports gf2 and gfq:<q> only".into(),
        ));
    }
    if args.rows == 0 || args.k.contains(&0) || args.n.contains(&0) {
        return Err(CliError::Usage("rows, k and n must be positive".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Usage(format!("writing CSV: {e}"));
    w.write_record(["field", "n", "k", "trials", "mean_combinations", "mean_ms"])
        .map_err(io)?;
    if args.trials > 0 {
        for &n in &args.n {
            for &k in &args.k {
                let row = bench_cell(args.field, args.rows, n, k, args.trials, args.seed)?;
                w.write_record([
                    args.field.to_string(),
                    n.to_string(),
                    k.to_string(),
                    row.trials.to_string(),
                    row.mean_combinations.to_string(),
                    format!("{:.4}", row.mean_ms),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush()
        .map_err(|e| CliError::Usage(format!("writing CSV: {e}")))?;
    Ok(())
}
