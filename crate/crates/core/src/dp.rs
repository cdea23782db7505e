//! Deterministic bounded-coefficient dynamic program.
//!
//! Columns are absorbed left to right. Level `j` of the reach table holds
//! every vector `sum alpha_t A[:, c_t]` over `j` distinct processed columns
//! with `alpha_t` in `{-M, .., M} \ {0}`. Before column `i` is absorbed, it is
//! looked up in levels `0..k`; a hit means `A[:, i]` is a bounded combination
//! of at most `k - 1` earlier columns, i.e. a dependency of size `<= k`.
//!
//! Only dependencies in which some column can be normalized to coefficient
//! `-1` with every other coefficient inside `[-M, M]` are detectable.

use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::hashing::FingerprintHasher;
use crate::types::{
    trivial_screen, verify_witness, Algorithm, ArithmeticMode, Matrix, RunStats, Verdict,
    VerifyConfig, Witness,
};

const NO_PRED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct BackPointer {
    column: u32,
    alpha: i64,
    pred: u32,
}

/// One reach set: vectors in a flat arena, bucketed by a 64-bit key with
/// intrusive chains so no per-vector allocation is made.
#[derive(Debug, Clone, Default)]
struct Level {
    heads: HashMap<u64, u32, BuildHasherDefault<FingerprintHasher>>,
    next: Vec<u32>,
    vectors: Vec<i64>,
    back: Vec<BackPointer>,
}

fn vector_key(v: &[i64]) -> u64 {
    v.iter().fold(0x243f_6a88_85a3_08d3u64, |h, &x| {
        (h ^ x as u64)
            .wrapping_mul(0xff51_afd7_ed55_8ccd)
            .rotate_left(29)
    })
}

impl Level {
    fn len(&self) -> usize {
        self.back.len()
    }

    fn vector(&self, id: u32, dim: usize) -> &[i64] {
        &self.vectors[id as usize * dim..(id as usize + 1) * dim]
    }

    fn get(&self, v: &[i64]) -> Option<u32> {
        let mut cur = self.heads.get(&vector_key(v)).copied().unwrap_or(NO_PRED);
        while cur != NO_PRED {
            if self.vector(cur, v.len()) == v {
                return Some(cur);
            }
            cur = self.next[cur as usize];
        }
        None
    }

    /// Stores `v` unless present; returns whether it was new.
    fn insert(&mut self, v: &[i64], bp: BackPointer) -> bool {
        if self.get(v).is_some() {
            return false;
        }
        let id = self.len() as u32;
        let head = self.heads.entry(vector_key(v)).or_insert(NO_PRED);
        self.next.push(*head);
        *head = id;
        self.vectors.extend_from_slice(v);
        self.back.push(bp);
        true
    }
}

/// Reach sets for `j = 0..k`, with back-pointers for witness recovery.
#[derive(Debug, Clone)]
pub struct ReachTable {
    dim: usize,
    bound: i64,
    levels: Vec<Level>,
    processed: usize,
    cap: usize,
    generated: u64,
}

impl ReachTable {
    /// Levels `0..k` for vectors of length `dim`; level 0 holds the zero
    /// vector.
    pub fn new(dim: usize, k: usize, bound: u64, cap: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if bound == 0 {
            return Err(Error::Argument(
                "coefficient bound must be at least 1".into(),
            ));
        }
        let bound = i64::try_from(bound)
            .map_err(|_| Error::Overflow(format!("coefficient bound {bound}")))?;
        let mut levels = vec![Level::default(); k];
        levels[0].insert(
            &vec![0i64; dim],
            BackPointer {
                column: u32::MAX,
                alpha: 0,
                pred: NO_PRED,
            },
        );
        Ok(ReachTable {
            dim,
            bound,
            levels,
            processed: 0,
            cap,
            generated: 0,
        })
    }

    /// Number of levels (`k`).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Columns absorbed so far.
    pub fn processed(&self) -> usize {
        self.processed
    }

    /// Stored vectors over all levels.
    pub fn len(&self) -> usize {
        self.levels.iter().map(Level::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Candidate vectors generated by all extensions so far.
    pub fn generated(&self) -> u64 {
        self.generated
    }

    /// Vectors of level `j`, in insertion order.
    pub fn level(&self, j: usize) -> impl Iterator<Item = &[i64]> + '_ {
        let level = &self.levels[j];
        (0..level.len() as u32).map(move |t| level.vector(t, self.dim))
    }

    /// Smallest level holding `v`, with the entry's id.
    pub fn find(&self, v: &[i64]) -> Option<(usize, u32)> {
        self.levels
            .iter()
            .enumerate()
            .find_map(|(j, level)| level.get(v).map(|id| (j, id)))
    }

    /// The `(column, alpha)` terms that produced entry `id` of level `j`.
    pub fn terms(&self, j: usize, id: u32) -> Vec<(usize, i64)> {
        let mut out = Vec::with_capacity(j);
        let (mut level, mut cur) = (j, id);
        while level > 0 {
            let bp = self.levels[level].back[cur as usize];
            out.push((bp.column as usize, bp.alpha));
            cur = bp.pred;
            level -= 1;
        }
        out.reverse();
        out
    }

    /// Extends every level by one more column. Levels are updated from the
    /// top down so each new vector extends a pre-column vector.
    pub fn absorb(&mut self, column_index: usize, column: &[i64]) -> Result<()> {
        assert_eq!(column.len(), self.dim, "column length");
        let col_id =
            u32::try_from(column_index).map_err(|_| Error::Overflow("column index".into()))?;
        let dim = self.dim;
        let mut scratch = vec![0i64; dim];
        let mut total = self.len();
        for j in (1..self.levels.len()).rev() {
            let (lower, upper) = self.levels.split_at_mut(j);
            let src = &lower[j - 1];
            let dst = &mut upper[0];
            for t in 0..src.len() {
                let base = &src.vectors[t * dim..(t + 1) * dim];
                for alpha in (-self.bound..=self.bound).filter(|&a| a != 0) {
                    self.generated += 1;
                    for ((s, &b), &c) in scratch.iter_mut().zip(base).zip(column) {
                        *s = alpha
                            .checked_mul(c)
                            .and_then(|p| p.checked_add(b))
                            .ok_or_else(|| Error::Overflow("reach vector entry".into()))?;
                    }
                    let bp = BackPointer {
                        column: col_id,
                        alpha,
                        pred: t as u32,
                    };
                    if dst.insert(&scratch, bp) {
                        total += 1;
                        if total > self.cap {
                            return Err(Error::Resource(format!(
                                "reach sets exceed {} vectors while absorbing column {column_index}",
                                self.cap
                            )));
                        }
                    }
                }
            }
        }
        self.processed += 1;
        Ok(())
    }
}

/// Bounded-coefficient dynamic-programming verifier with coefficient bound
/// `bound` (the `M` of the reach sets).
pub fn verify_dp(a: &Matrix, bound: u64, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let start = Instant::now();
    if let Some(v) = trivial_screen(a, cfg.k) {
        return Ok(v
            .retag(Algorithm::Dp, cfg.seed)
            .with_elapsed(start.elapsed()));
    }
    let mut table = ReachTable::new(a.rows(), cfg.k, bound, cfg.dp_reach_cap)?;
    let mut column = vec![0i64; a.rows()];
    for i in 0..a.cols() {
        for (slot, v) in column.iter_mut().zip(a.column(i)) {
            *slot = v;
        }
        if let Some((j, id)) = table.find(&column) {
            let mut pairs = table.terms(j, id);
            pairs.push((i, -1));
            let w = Witness::from_pairs(pairs)
                .ok_or_else(|| Error::Argument("empty DP witness".into()))?
                .normalize_integer();
            if verify_witness(a, ArithmeticMode::Integer, &w)? {
                let stats = RunStats {
                    combinations: table.generated(),
                    ..RunStats::default()
                };
                let v = Verdict::less_than(cfg.k, w, Algorithm::Dp, cfg.seed, stats);
                return Ok(v.with_elapsed(start.elapsed()));
            }
        }
        if i + 1 < a.cols() {
            table.absorb(i, &column)?;
        }
    }
    let stats = RunStats {
        combinations: table.generated(),
        ..RunStats::default()
    };
    Ok(Verdict::at_least(cfg.k, Algorithm::Dp, cfg.seed, stats).with_elapsed(start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Outcome;

    #[test]
    fn identity_passes() {
        let id = Matrix::identity(2).unwrap();
        assert!(verify_dp(&id, 1, &VerifyConfig::new(2))
            .unwrap()
            .is_at_least());
    }

    #[test]
    fn equal_columns() {
        let a = Matrix::from_rows(&[[1, 1]]).unwrap();
        let v = verify_dp(&a, 1, &VerifyConfig::new(2)).unwrap();
        assert_eq!(v.outcome, Outcome::LessThanK);
        let w = v.witness.unwrap();
        assert_eq!(w.support(), &[0, 1]);
        assert_eq!(w.coefficients(), &[1, -1]);
    }

    #[test]
    fn bounded_class_only() {
        // c2 = 3 c0: visible with M = 3, invisible with M = 2 at k = 2 since
        // c0 = c2 / 3 is not integral either.
        let a = Matrix::from_rows(&[[1, 0, 3], [0, 1, 0]]).unwrap();
        assert_eq!(
            verify_dp(&a, 3, &VerifyConfig::new(2)).unwrap().outcome,
            Outcome::LessThanK
        );
        assert!(verify_dp(&a, 2, &VerifyConfig::new(2))
            .unwrap()
            .is_at_least());
    }

    #[test]
    fn reach_levels_grow_monotonically() {
        let a = Matrix::from_rows(&[[1, 2, -1], [0, 1, 1]]).unwrap();
        let mut t = ReachTable::new(2, 3, 1, 1_000).unwrap();
        let mut prev: Vec<Vec<Vec<i64>>> = (0..3)
            .map(|j| t.level(j).map(<[i64]>::to_vec).collect())
            .collect();
        for i in 0..3 {
            let col: Vec<i64> = a.column(i).collect();
            t.absorb(i, &col).unwrap();
            for j in 0..3 {
                let now: Vec<Vec<i64>> = t.level(j).map(<[i64]>::to_vec).collect();
                assert!(prev[j].iter().all(|v| now.contains(v)));
                for v in &now {
                    assert!(v.iter().all(|x| x.unsigned_abs() <= (j as u64) * 2));
                }
                prev[j] = now;
            }
        }
        // Level 1 after 3 columns: +-c for each column, M = 1.
        assert_eq!(t.level(1).count(), 6);
    }

    #[test]
    fn cap_is_a_resource_error() {
        let a = Matrix::from_rows(&[[7, 11, 13, 17, 19, 23]]).unwrap();
        let mut cfg = VerifyConfig::new(4);
        cfg.dp_reach_cap = 10;
        assert!(matches!(verify_dp(&a, 2, &cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn zero_bound_rejected() {
        let id = Matrix::identity(2).unwrap();
        assert!(verify_dp(&id, 0, &VerifyConfig::new(2)).is_err());
    }
}
