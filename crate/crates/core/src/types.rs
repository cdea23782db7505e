//! Domain types shared by every verifier.

use std::fmt;
use std::time::Duration;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Prime;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x6b72_7573_6b61_6c31;

/// Dense `rows x cols` integer matrix stored row-major.
///
/// Columns are the dependency dimension: every verifier looks for sparse
/// combinations of columns that vanish.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
    entry_bound: u64,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Overflow(format!("{rows}x{cols} matrix")))?;
        if entries.len() != expected {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                expected,
                found: entries.len(),
            });
        }
        let entry_bound = compute_entry_bound(&entries);
        Ok(Matrix {
            rows,
            cols,
            entries,
            entry_bound,
        })
    }

    /// Builds a matrix from a slice of rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(d * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    rows: d,
                    cols: n,
                    expected: d * n,
                    found: entries.len() + row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Matrix::new(d, n, entries)
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut entries = vec![0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1;
        }
        Matrix::new(size, size, entries)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.cols + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Maximum absolute entry, 0 for the zero matrix.
    #[inline]
    pub fn entry_bound(&self) -> u64 {
        self.entry_bound
    }

    /// Recomputes the entry bound from scratch (it is cached at construction).
    pub fn recompute_entry_bound(&self) -> u64 {
        compute_entry_bound(&self.entries)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = i64> + '_ {
        (0..self.rows).map(move |r| self.get(r, col))
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn is_zero_column(&self, col: usize) -> bool {
        self.column(col).all(|v| v == 0)
    }

    /// The `rows x |cols|` submatrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::Argument(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            entries.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        Matrix::new(self.rows, cols.len(), entries)
    }

    pub fn transpose(&self) -> Matrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            entries.extend(self.column(c));
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries,
            entry_bound: self.entry_bound,
        }
    }

    /// Returns the first entry that is not a residue of `mode`, if any.
    pub fn check_residues(&self, mode: ArithmeticMode) -> Result<()> {
        let Some(q) = mode.modulus() else {
            return Ok(());
        };
        match self.entries.iter().position(|&v| v < 0 || v as u64 >= q) {
            None => Ok(()),
            Some(at) => Err(Error::Mode {
                row: at / self.cols,
                col: at % self.cols,
                value: self.entries[at],
                mode: mode.to_string(),
            }),
        }
    }
}

fn compute_entry_bound(entries: &[i64]) -> u64 {
    entries.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Arithmetic in which linear dependence is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithmeticMode {
    Gf2,
    Gfq(Prime),
    Integer,
}

impl ArithmeticMode {
    /// GF(q) for a prime `q`; `q = 2` yields [`ArithmeticMode::Gf2`].
    pub fn gfq(q: u64) -> Result<Self> {
        let p = Prime::new(q)?;
        Ok(if q == 2 {
            ArithmeticMode::Gf2
        } else {
            ArithmeticMode::Gfq(p)
        })
    }

    /// Field modulus, `None` for integer arithmetic.
    pub fn modulus(self) -> Option<u64> {
        match self {
            ArithmeticMode::Gf2 => Some(2),
            ArithmeticMode::Gfq(p) => Some(p.get()),
            ArithmeticMode::Integer => None,
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticMode::Gf2 => write!(f, "gf2"),
            ArithmeticMode::Gfq(p) => write!(f, "gfq:{}", p.get()),
            ArithmeticMode::Integer => write!(f, "int"),
        }
    }
}

/// Sparse coefficient vector over the columns of a matrix.
///
/// For field modes coefficients are canonical residues; for integer mode they
/// are plain integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    support: Vec<usize>,
    coefficients: Vec<i64>,
}

impl Witness {
    /// Validates structure only: nonempty, strictly increasing support,
    /// aligned coefficients. Arithmetic validity is [`verify_witness`]'s job.
    pub fn new(support: Vec<usize>, coefficients: Vec<i64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::MalformedWitness("empty support".into()));
        }
        if support.len() != coefficients.len() {
            return Err(Error::MalformedWitness(format!(
                "{} indices but {} coefficients",
                support.len(),
                coefficients.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedWitness(
                "support is not strictly increasing".into(),
            ));
        }
        Ok(Witness {
            support,
            coefficients,
        })
    }

    /// Builds a witness from unordered `(column, coefficient)` pairs, dropping
    /// zero coefficients. Returns `None` if nothing nonzero remains.
    pub fn from_pairs(mut pairs: Vec<(usize, i64)>) -> Option<Self> {
        pairs.retain(|&(_, c)| c != 0);
        pairs.sort_unstable_by_key(|&(i, _)| i);
        if pairs.is_empty() || pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        let (support, coefficients) = pairs.into_iter().unzip();
        Some(Witness {
            support,
            coefficients,
        })
    }

    /// Integer normalization: content 1 and a positive leading coefficient.
    pub fn normalize_integer(mut self) -> Witness {
        let g = self
            .coefficients
            .iter()
            .fold(0u64, |g, &c| num_integer::gcd(g, c.unsigned_abs()));
        let sign = if self.coefficients[0] < 0 { -1 } else { 1 };
        if g > 1 || sign < 0 {
            for c in &mut self.coefficients {
                *c = *c / g as i64 * sign;
            }
        }
        self
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
    }
}

/// Exactly checks `sum_t c_t * A[:, s_t] == 0` in `mode`, and that the
/// witness is nonzero in `mode`.
pub fn verify_witness(a: &Matrix, mode: ArithmeticMode, w: &Witness) -> Result<bool> {
    if let Some(&bad) = w.support.iter().find(|&&c| c >= a.cols()) {
        return Err(Error::MalformedWitness(format!(
            "index {bad} out of range for {} columns",
            a.cols()
        )));
    }
    if w.support.len() != w.coefficients.len() || w.support.is_empty() {
        return Err(Error::MalformedWitness("misaligned witness".into()));
    }
    match mode.modulus() {
        Some(q) => {
            let q = q as i128;
            let coeffs: Vec<i128> = w
                .coefficients
                .iter()
                .map(|&c| (c as i128).rem_euclid(q))
                .collect();
            if coeffs.iter().all(|&c| c == 0) {
                return Ok(false);
            }
            for r in 0..a.rows() {
                let mut acc: i128 = 0;
                for (&col, &c) in w.support.iter().zip(&coeffs) {
                    acc = (acc + c * (a.get(r, col) as i128).rem_euclid(q)) % q;
                }
                if acc != 0 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        None => {
            if w.coefficients.iter().all(|&c| c == 0) {
                return Ok(false);
            }
            for r in 0..a.rows() {
                let mut acc = BigInt::zero();
                for (col, c) in w.iter() {
                    acc += BigInt::from(c) * BigInt::from(a.get(r, col));
                }
                if !acc.is_zero() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AtLeastK,
    LessThanK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    HashGf2,
    HashGfq,
    HashInteger,
    Dp,
    Oracle,
}

/// Why a verdict was settled before the main search ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenReason {
    /// `k` exceeds the number of columns; no witness need exist.
    KExceedsColumns,
    ZeroColumn,
}

/// Counters collected during a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Combinations `(U, alpha)` generated, summed over every prime.
    pub combinations: u64,
    /// Probes whose fingerprint bucket was non-empty (per stored entry).
    pub fingerprint_collisions: u64,
    /// Fingerprint matches rejected by exact confirmation.
    pub false_matches: u64,
    /// Confirmed mod-p dependencies with no rational counterpart.
    pub spurious_modular: u64,
    pub primes_tried: usize,
    /// Prime whose run produced the candidate support of an integer witness.
    pub modular_prime: Option<u64>,
    pub screen: Option<ScreenReason>,
}

/// Outcome of a verification, with its witness when the answer is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub k: usize,
    pub witness: Option<Witness>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub elapsed: Duration,
    pub stats: RunStats,
}

impl Verdict {
    pub fn at_least(k: usize, algorithm: Algorithm, seed: u64, stats: RunStats) -> Self {
        Verdict {
            outcome: Outcome::AtLeastK,
            k,
            witness: None,
            algorithm,
            seed,
            elapsed: Duration::ZERO,
            stats,
        }
    }

    pub fn less_than(
        k: usize,
        witness: Witness,
        algorithm: Algorithm,
        seed: u64,
        stats: RunStats,
    ) -> Self {
        Verdict {
            outcome: Outcome::LessThanK,
            k,
            witness: Some(witness),
            algorithm,
            seed,
            elapsed: Duration::ZERO,
            stats,
        }
    }

    /// `k > n`: negative without a witness.
    pub fn exceeds_columns(k: usize, algorithm: Algorithm, seed: u64) -> Self {
        Verdict {
            outcome: Outcome::LessThanK,
            k,
            witness: None,
            algorithm,
            seed,
            elapsed: Duration::ZERO,
            stats: RunStats {
                screen: Some(ScreenReason::KExceedsColumns),
                ..RunStats::default()
            },
        }
    }

    pub fn is_at_least(&self) -> bool {
        self.outcome == Outcome::AtLeastK
    }

    pub(crate) fn with_elapsed(mut self, elapsed: Duration) -> Self {
        self.elapsed = elapsed;
        self
    }

    pub(crate) fn retag(mut self, algorithm: Algorithm, seed: u64) -> Self {
        self.algorithm = algorithm;
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FingerprintWidth {
    /// Polynomial digest modulo 2^61 - 1.
    W64,
    /// Polynomial digest modulo 2^127 - 1.
    #[default]
    W128,
}

impl FingerprintWidth {
    pub fn bits(self) -> u32 {
        match self {
            FingerprintWidth::W64 => 64,
            FingerprintWidth::W128 => 128,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            64 => Ok(FingerprintWidth::W64),
            128 => Ok(FingerprintWidth::W128),
            other => Err(Error::Argument(format!(
                "fingerprint width must be 64 or 128, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub k: usize,
    pub seed: u64,
    pub fingerprint_width: FingerprintWidth,
    pub prime_count_override: Option<usize>,
    pub max_prime_bound_override: Option<u64>,
    /// Worker threads for the per-prime runs of the integer verifier.
    pub threads: usize,
    /// Maximum total number of stored vectors in the DP reach sets.
    pub dp_reach_cap: usize,
    /// Maximum number of subset eliminations the oracle may perform.
    pub oracle_work_cap: u64,
}

impl VerifyConfig {
    pub fn new(k: usize) -> Self {
        VerifyConfig {
            k,
            seed: DEFAULT_SEED,
            fingerprint_width: FingerprintWidth::default(),
            prime_count_override: None,
            max_prime_bound_override: None,
            threads: 1,
            dp_reach_cap: 10_000_000,
            oracle_work_cap: 20_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Argument("threads must be at least 1".into()));
        }
        if self.prime_count_override == Some(0) {
            return Err(Error::Argument("prime count must be at least 1".into()));
        }
        if matches!(self.max_prime_bound_override, Some(b) if b < 2) {
            return Err(Error::Argument("prime bound must be at least 2".into()));
        }
        Ok(())
    }
}

/// Settles the degenerate cases before any search: a zero column is a
/// dependent singleton, and `k > n` makes the Kruskal rank trivially smaller
/// than `k`. Never returns [`Outcome::AtLeastK`].
pub fn trivial_screen(a: &Matrix, k: usize) -> Option<Verdict> {
    if let Some(col) = (0..a.cols()).find(|&c| a.is_zero_column(c)) {
        let stats = RunStats {
            screen: Some(ScreenReason::ZeroColumn),
            ..RunStats::default()
        };
        let w = Witness::new(vec![col], vec![1]).expect("singleton witness");
        return Some(Verdict::less_than(k, w, Algorithm::Oracle, 0, stats));
    }
    if k > a.cols() {
        return Some(Verdict::exceeds_columns(k, Algorithm::Oracle, 0));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf3() -> ArithmeticMode {
        ArithmeticMode::gfq(3).unwrap()
    }

    #[test]
    fn matrix_rejects_bad_shapes() {
        assert!(matches!(
            Matrix::new(0, 3, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![1, 2, 3]),
            Err(Error::ShapeMismatch {
                expected: 4,
                found: 3,
                ..
            })
        ));
        assert!(Matrix::from_rows(&[vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn entry_bound_is_cached_max_abs() {
        let a = Matrix::from_rows(&[[5, -7], [0, 3]]).unwrap();
        assert_eq!(a.entry_bound(), 7);
        assert_eq!(a.recompute_entry_bound(), 7);
        let z = Matrix::new(2, 2, vec![0; 4]).unwrap();
        assert_eq!(z.entry_bound(), 0);
        let t = a.transpose();
        assert_eq!(t.get(0, 1), 0);
        assert_eq!(t.get(1, 0), -7);
        assert_eq!(t.entry_bound(), t.recompute_entry_bound());
    }

    #[test]
    fn screen_k_exceeds_columns() {
        let v = trivial_screen(&Matrix::identity(2).unwrap(), 3).unwrap();
        assert_eq!(v.outcome, Outcome::LessThanK);
        assert_eq!(v.stats.screen, Some(ScreenReason::KExceedsColumns));
        assert!(v.witness.is_none());
    }

    #[test]
    fn screen_zero_column() {
        let a = Matrix::from_rows(&[[1, 0], [0, 0]]).unwrap();
        let v = trivial_screen(&a, 1).unwrap();
        assert_eq!(v.outcome, Outcome::LessThanK);
        let w = v.witness.unwrap();
        assert_eq!(w.support(), &[1]);
        assert_eq!(w.coefficients(), &[1]);
    }

    #[test]
    fn screen_passes_regular_matrices() {
        assert!(trivial_screen(&Matrix::identity(3).unwrap(), 2).is_none());
    }

    #[test]
    fn witness_checks() {
        let a = Matrix::from_rows(&[[1, 0, 1], [0, 1, 1]]).unwrap();
        let w = Witness::new(vec![0, 1, 2], vec![1, 1, 1]).unwrap();
        assert!(verify_witness(&a, ArithmeticMode::Gf2, &w).unwrap());
        // Over the integers the same columns need coefficients (1, 1, -1).
        assert!(!verify_witness(&a, ArithmeticMode::Integer, &w).unwrap());
        let wi = Witness::new(vec![0, 1, 2], vec![1, 1, -1]).unwrap();
        assert!(verify_witness(&a, ArithmeticMode::Integer, &wi).unwrap());

        let id = Matrix::identity(2).unwrap();
        let w = Witness::new(vec![0, 1], vec![1, 1]).unwrap();
        assert!(!verify_witness(&id, ArithmeticMode::Gf2, &w).unwrap());

        let b = Matrix::from_rows(&[[1, 2], [2, 1]]).unwrap();
        let w = Witness::new(vec![0, 1], vec![2, 2]).unwrap();
        assert!(verify_witness(&b, gf3(), &w).unwrap());
    }

    #[test]
    fn witness_zero_in_mode_is_rejected() {
        let a = Matrix::from_rows(&[[1, 1]]).unwrap();
        let w = Witness::new(vec![0, 1], vec![2, 2]).unwrap();
        // 2 == 0 in GF(2): the witness vanishes.
        assert!(!verify_witness(&a, ArithmeticMode::Gf2, &w).unwrap());
    }

    #[test]
    fn witness_out_of_range_is_malformed() {
        let a = Matrix::identity(2).unwrap();
        let w = Witness::new(vec![0, 5], vec![1, 1]).unwrap();
        assert!(matches!(
            verify_witness(&a, ArithmeticMode::Gf2, &w),
            Err(Error::MalformedWitness(_))
        ));
    }

    #[test]
    fn witness_structure() {
        assert!(Witness::new(vec![], vec![]).is_err());
        assert!(Witness::new(vec![1, 1], vec![1, 1]).is_err());
        assert!(Witness::new(vec![2, 1], vec![1, 1]).is_err());
        assert!(Witness::new(vec![1], vec![1, 2]).is_err());
        let w = Witness::from_pairs(vec![(3, 2), (1, 0), (0, -1)]).unwrap();
        assert_eq!(w.support(), &[0, 3]);
        assert_eq!(w.coefficients(), &[-1, 2]);
        assert!(Witness::from_pairs(vec![(1, 0)]).is_none());
    }

    #[test]
    fn mode_construction() {
        assert_eq!(ArithmeticMode::gfq(2).unwrap(), ArithmeticMode::Gf2);
        assert!(ArithmeticMode::gfq(4).is_err());
        assert_eq!(ArithmeticMode::gfq(7).unwrap().to_string(), "gfq:7");
    }

    #[test]
    fn config_validation() {
        assert!(VerifyConfig::new(0).validate().is_err());
        assert!(VerifyConfig::new(3).validate().is_ok());
    }
}
