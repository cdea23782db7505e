//! Exhaustive exact Kruskal rank, the reference every verifier is checked
//! against.
//!
//! Independence of a column subset is decided by Gauss-Jordan elimination:
//! modulo `q` for field modes, fraction-free (Bareiss) over the integers
//! otherwise. No floating point is involved.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumeration::{binomial, subsets};
use crate::error::{Error, Result};
use crate::gf::PrimeField;
use crate::types::{Algorithm, ArithmeticMode, Matrix, RunStats, Verdict, VerifyConfig, Witness};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Exact Kruskal rank when `exact`, otherwise a lower bound.
    pub kruskal_rank: usize,
    pub exact: bool,
    /// A dependency of support size `kruskal_rank + 1`, when one was found.
    pub minimal_dependency: Option<Witness>,
}

impl OracleResult {
    /// Whether the Kruskal rank is known to be at least `k`, if decidable.
    pub fn at_least(&self, k: usize) -> Option<bool> {
        if k <= self.kruskal_rank {
            Some(true)
        } else if self.exact {
            Some(false)
        } else {
            None
        }
    }
}

/// Fraction-free Gauss-Jordan elimination. On return every pivot equals the
/// returned determinant-like scale `d` and pivot columns form `d * I`.
fn bareiss_reduce(m: &mut [Vec<BigInt>], cols: usize) -> (Vec<usize>, BigInt) {
    let rows = m.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == rows {
            break;
        }
        let Some(r) = (row..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(r, row);
        let p = m[row][c].clone();
        for i in 0..rows {
            if i == row {
                continue;
            }
            let factor = m[i][c].clone();
            for j in 0..cols {
                let v = &p * &m[i][j] - &factor * &m[row][j];
                let (quot, rem) = v.div_rem(&prev);
                debug_assert!(rem.is_zero(), "inexact fraction-free step");
                m[i][j] = quot;
            }
        }
        prev = p;
        pivots.push(c);
        row += 1;
    }
    (pivots, prev)
}

fn integer_kernel(b: &Matrix) -> Option<Vec<BigInt>> {
    let s = b.cols();
    let mut m: Vec<Vec<BigInt>> = (0..b.rows())
        .map(|r| b.row(r).iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let (pivots, scale) = bareiss_reduce(&mut m, s);
    if pivots.len() == s {
        return None;
    }
    let free = (0..s).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigInt::zero(); s];
    x[free] = scale;
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[r][free].clone();
    }
    let g = x.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    for v in &mut x {
        *v /= &g;
    }
    if x.iter()
        .find(|v| !v.is_zero())
        .is_some_and(|v| v.is_negative())
    {
        for v in &mut x {
            *v = -&*v;
        }
    }
    Some(x)
}

fn rank_mod(b: &Matrix, field: PrimeField) -> (Vec<usize>, Vec<Vec<u64>>) {
    let (rows, cols) = (b.rows(), b.cols());
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|r| b.row(r).iter().map(|&v| field.reduce(v)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == rows {
            break;
        }
        let Some(r) = (row..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(r, row);
        let inv = field.inv(m[row][c]).expect("nonzero pivot");
        for v in &mut m[row] {
            *v = field.mul(*v, inv);
        }
        for i in 0..rows {
            if i != row && m[i][c] != 0 {
                let factor = m[i][c];
                for j in 0..cols {
                    let sub = field.mul(factor, m[row][j]);
                    m[i][j] = field.sub(m[i][j], sub);
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    (pivots, m)
}

fn field_kernel(b: &Matrix, field: PrimeField) -> Option<Vec<u64>> {
    let s = b.cols();
    let (pivots, m) = rank_mod(b, field);
    if pivots.len() == s {
        return None;
    }
    let free = (0..s).find(|c| !pivots.contains(c))?;
    let mut x = vec![0u64; s];
    x[free] = 1;
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = field.neg(m[r][free]);
    }
    let lead = x.iter().copied().find(|&v| v != 0)?;
    let inv = field.inv(lead)?;
    Some(x.into_iter().map(|v| field.mul(v, inv)).collect())
}

/// A nonzero kernel vector of the columns of `b`, or `None` if they are
/// independent. Integer results have content 1 and a positive leading
/// coefficient; field results are canonical residues with leading 1.
pub fn exact_nullspace_vector(b: &Matrix, mode: ArithmeticMode) -> Result<Option<Vec<i64>>> {
    match mode.modulus() {
        Some(q) => {
            let field = PrimeField::new(q)?;
            Ok(field_kernel(b, field).map(|x| x.into_iter().map(|v| v as i64).collect()))
        }
        None => match integer_kernel(b) {
            None => Ok(None),
            Some(x) => x
                .iter()
                .map(|v| {
                    v.to_i64()
                        .ok_or_else(|| Error::Overflow(format!("kernel coefficient {v}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        },
    }
}

/// Whether the columns of `b` are linearly independent in `mode`.
pub fn columns_independent(b: &Matrix, mode: ArithmeticMode) -> Result<bool> {
    match mode.modulus() {
        Some(q) => Ok(rank_mod(b, PrimeField::new(q)?).0.len() == b.cols()),
        None => {
            let mut m: Vec<Vec<BigInt>> = (0..b.rows())
                .map(|r| b.row(r).iter().map(|&v| BigInt::from(v)).collect())
                .collect();
            Ok(bareiss_reduce(&mut m, b.cols()).0.len() == b.cols())
        }
    }
}

/// Tests every subset of size `1..=min(k_max + 1, n)` in increasing size and
/// stops at the first dependent one.
pub fn oracle_kruskal_rank(
    a: &Matrix,
    mode: ArithmeticMode,
    k_max: usize,
    work_cap: u64,
) -> Result<OracleResult> {
    let n = a.cols();
    let top = (k_max + 1).min(n);
    let work = (1..=top).fold(0u128, |acc, s| acc.saturating_add(binomial(n, s)));
    if work > work_cap as u128 {
        return Err(Error::Resource(format!(
            "oracle needs {work} subset eliminations, cap is {work_cap}"
        )));
    }
    for s in 1..=top {
        for subset in subsets(n, s) {
            let b = a.select_columns(&subset)?;
            if let Some(x) = exact_nullspace_vector(&b, mode)? {
                let pairs = subset.iter().copied().zip(x).collect();
                let w = Witness::from_pairs(pairs)
                    .ok_or_else(|| Error::Argument("zero kernel vector".into()))?;
                return Ok(OracleResult {
                    kruskal_rank: s - 1,
                    exact: true,
                    minimal_dependency: Some(w),
                });
            }
        }
    }
    Ok(OracleResult {
        kruskal_rank: top,
        exact: top == n,
        minimal_dependency: None,
    })
}

/// Oracle-backed decision for one `k`, in the same shape as the verifiers.
pub fn oracle_verdict(a: &Matrix, mode: ArithmeticMode, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let start = Instant::now();
    let res = oracle_kruskal_rank(a, mode, cfg.k - 1, cfg.oracle_work_cap)?;
    let stats = RunStats::default();
    let verdict = match res.at_least(cfg.k) {
        Some(true) => Verdict::at_least(cfg.k, Algorithm::Oracle, cfg.seed, stats),
        _ => match res.minimal_dependency {
            Some(w) => Verdict::less_than(cfg.k, w, Algorithm::Oracle, cfg.seed, stats),
            None => Verdict::exceeds_columns(cfg.k, Algorithm::Oracle, cfg.seed),
        },
    };
    Ok(verdict.with_elapsed(start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::verify_witness;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_full_rank_in_every_mode() {
        let id = Matrix::identity(3).unwrap();
        for mode in [
            ArithmeticMode::Gf2,
            ArithmeticMode::gfq(5).unwrap(),
            ArithmeticMode::Integer,
        ] {
            let r = oracle_kruskal_rank(&id, mode, 5, 1_000).unwrap();
            assert_eq!(r.kruskal_rank, 3);
            assert!(r.exact);
            assert!(r.minimal_dependency.is_none());
        }
    }

    #[test]
    fn zero_column_gives_rank_zero() {
        let a = m(&[&[1, 0, 2], &[3, 0, 1]]);
        let r = oracle_kruskal_rank(&a, ArithmeticMode::Integer, 3, 1_000).unwrap();
        assert_eq!(r.kruskal_rank, 0);
        let w = r.minimal_dependency.unwrap();
        assert_eq!(w.support(), &[1]);
        assert_eq!(w.coefficients(), &[1]);
    }

    #[test]
    fn gf2_triangle() {
        let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let r = oracle_kruskal_rank(&a, ArithmeticMode::Gf2, 3, 1_000).unwrap();
        assert_eq!(r.kruskal_rank, 2);
        let w = r.minimal_dependency.unwrap();
        assert_eq!(w.support(), &[0, 1, 2]);
        assert_eq!(w.coefficients(), &[1, 1, 1]);
    }

    #[test]
    fn nullspace_examples() {
        let b = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(
            exact_nullspace_vector(&b, ArithmeticMode::Integer).unwrap(),
            Some(vec![2, -1])
        );
        let id = Matrix::identity(2).unwrap();
        assert_eq!(
            exact_nullspace_vector(&id, ArithmeticMode::Integer).unwrap(),
            None
        );
        let c = m(&[&[1, 2], &[2, 1]]);
        assert_eq!(
            exact_nullspace_vector(&c, ArithmeticMode::gfq(3).unwrap()).unwrap(),
            Some(vec![1, 1])
        );
    }

    #[test]
    fn bareiss_kernel_on_wider_system() {
        // Rank 2 in 3 rows, 4 columns: kernel vectors must vanish exactly.
        let b = m(&[&[2, -1, 3, 1], &[4, -2, 6, 2], &[1, 1, 0, 3]]);
        let x = exact_nullspace_vector(&b, ArithmeticMode::Integer)
            .unwrap()
            .unwrap();
        let w = Witness::from_pairs(x.iter().copied().enumerate().collect()).unwrap();
        assert!(verify_witness(&b, ArithmeticMode::Integer, &w).unwrap());
        assert!(!columns_independent(&b, ArithmeticMode::Integer).unwrap());
    }

    #[test]
    fn work_cap_is_enforced() {
        let a = Matrix::new(1, 40, vec![1; 40]).unwrap();
        assert!(matches!(
            oracle_kruskal_rank(&a, ArithmeticMode::Integer, 10, 1_000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn lower_bound_when_capped_by_k_max() {
        let id = Matrix::identity(5).unwrap();
        let r = oracle_kruskal_rank(&id, ArithmeticMode::Gf2, 1, 1_000).unwrap();
        assert_eq!(r.kruskal_rank, 2);
        assert!(!r.exact);
        assert_eq!(r.at_least(2), Some(true));
        assert_eq!(r.at_least(3), None);
    }
}
