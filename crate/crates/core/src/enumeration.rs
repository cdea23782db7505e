//! Streaming enumeration of column subsets `U`, coefficient tuples `alpha`,
//! and the combination vectors `sum_t alpha_t A[:, U_t]` they produce.
//!
//! Cursors keep O(i) state. [`CombinationWalker`] visits every `(U, alpha)`
//! of one cardinality exactly once (subsets lexicographic, coefficients in
//! odometer order inside each subset) and maintains prefix sums so that
//! advancing only recomputes the suffix that changed.

use crate::error::{Error, Result};
use crate::hashing::{Fingerprint, Fingerprinter};
use crate::types::{ArithmeticMode, Matrix};

/// Lexicographic cursor over the `i`-subsets of `{0, .., n-1}`.
#[derive(Debug, Clone)]
pub struct SubsetCursor {
    n: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl SubsetCursor {
    pub fn new(n: usize, i: usize) -> Self {
        SubsetCursor {
            n,
            current: (0..i).collect(),
            started: false,
            done: i > n,
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.current
    }

    /// Moves to the next subset and returns the first position that changed
    /// (0 for the initial subset), or `None` once exhausted.
    pub fn advance(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(0);
        }
        let i = self.current.len();
        let n = self.n;
        let Some(t) = (0..i).rev().find(|&t| self.current[t] < n - i + t) else {
            self.done = true;
            return None;
        };
        self.current[t] += 1;
        for s in t + 1..i {
            self.current[s] = self.current[s - 1] + 1;
        }
        Some(t)
    }
}

impl Iterator for SubsetCursor {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().map(|_| self.current.clone())
    }
}

/// Odometer cursor over `{1, .., q-1}^i`, last position fastest.
#[derive(Debug, Clone)]
pub struct CoefficientCursor {
    q: u32,
    current: Vec<u32>,
    started: bool,
    done: bool,
}

impl CoefficientCursor {
    pub fn new(q: u32, i: usize) -> Self {
        CoefficientCursor {
            q,
            current: vec![1; i],
            started: false,
            done: q < 2,
        }
    }

    pub fn current(&self) -> &[u32] {
        &self.current
    }

    pub fn reset(&mut self) {
        self.current.iter_mut().for_each(|c| *c = 1);
        self.started = false;
        self.done = self.q < 2;
    }

    /// Same contract as [`SubsetCursor::advance`].
    pub fn advance(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(0);
        }
        let top = self.q - 1;
        let Some(t) = (0..self.current.len())
            .rev()
            .find(|&t| self.current[t] < top)
        else {
            self.done = true;
            return None;
        };
        self.current[t] += 1;
        for c in &mut self.current[t + 1..] {
            *c = 1;
        }
        Some(t)
    }
}

impl Iterator for CoefficientCursor {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        self.advance().map(|_| self.current.clone())
    }
}

/// All `i`-subsets of `{0, .., n-1}` in lexicographic order; empty if `i > n`.
pub fn subsets(n: usize, i: usize) -> SubsetCursor {
    SubsetCursor::new(n, i)
}

/// All tuples in `{1, .., q-1}^i` in odometer order.
pub fn coefficient_vectors(q: u32, i: usize) -> CoefficientCursor {
    CoefficientCursor::new(q, i)
}

/// Exact `sum_t alpha_t A[:, U_t]` in `mode`; residues are canonical.
pub fn combination_vector(
    a: &Matrix,
    support: &[usize],
    alpha: &[i64],
    mode: ArithmeticMode,
) -> Result<Vec<i64>> {
    if support.len() != alpha.len() {
        return Err(Error::Argument(format!(
            "{} indices but {} coefficients",
            support.len(),
            alpha.len()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&c| c >= a.cols()) {
        return Err(Error::Argument(format!("column {bad} out of range")));
    }
    let mut out = Vec::with_capacity(a.rows());
    for r in 0..a.rows() {
        let mut acc: i128 = 0;
        for (&c, &x) in support.iter().zip(alpha) {
            acc += a.get(r, c) as i128 * x as i128;
            if let Some(q) = mode.modulus() {
                acc = acc.rem_euclid(q as i128);
            }
        }
        let v =
            i64::try_from(acc).map_err(|_| Error::Overflow("combination vector entry".into()))?;
        out.push(v);
    }
    Ok(out)
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, i: usize) -> u128 {
    if i > n {
        return 0;
    }
    let i = i.min(n - i);
    let mut acc: u128 = 1;
    for t in 0..i {
        // acc * (n - t) / (t + 1) stays integral at every step.
        acc = match acc.checked_mul((n - t) as u128) {
            Some(v) => v / (t as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of `(U, alpha)` pairs a hashing verifier visits when it finds no
/// dependency: `sum_{i=0}^{ceil(k/2)} C(n, i) (q-1)^i`.
pub fn combination_count(n: usize, k: usize, q: u64) -> u128 {
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for i in 0..=k.div_ceil(2) {
        let term = binomial(n, i).saturating_mul(power);
        total = total.saturating_add(term);
        power = power.saturating_mul(q as u128 - 1);
    }
    total
}

/// Column storage for one field, as the walker sees it.
pub trait ColumnSpace {
    fn cols(&self) -> usize;
    /// Storage words per vector.
    fn words(&self) -> usize;
    fn modulus(&self) -> u64;
    /// `out = base + alpha * column(col)`.
    fn accumulate(&self, out: &mut [u64], base: &[u64], col: usize, alpha: u32);
    fn fingerprint(&self, fp: &Fingerprinter, v: &[u64]) -> Fingerprint;
}

/// GF(2) columns packed 64 rows per word.
#[derive(Debug, Clone)]
pub struct Gf2Columns {
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Columns {
    /// `a` must hold residues in `{0, 1}`.
    pub fn new(a: &Matrix) -> Self {
        let words = a.rows().div_ceil(64);
        let mut data = vec![0u64; words * a.cols()];
        for r in 0..a.rows() {
            let (word, bit) = (r / 64, r % 64);
            for (c, &v) in a.row(r).iter().enumerate() {
                data[c * words + word] |= ((v & 1) as u64) << bit;
            }
        }
        Gf2Columns {
            cols: a.cols(),
            words,
            data,
        }
    }
}

impl ColumnSpace for Gf2Columns {
    fn cols(&self) -> usize {
        self.cols
    }

    fn words(&self) -> usize {
        self.words
    }

    fn modulus(&self) -> u64 {
        2
    }

    #[inline]
    fn accumulate(&self, out: &mut [u64], base: &[u64], col: usize, _alpha: u32) {
        let column = &self.data[col * self.words..(col + 1) * self.words];
        for ((o, b), c) in out.iter_mut().zip(base).zip(column) {
            *o = b ^ c;
        }
    }

    #[inline]
    fn fingerprint(&self, fp: &Fingerprinter, v: &[u64]) -> Fingerprint {
        fp.hash_bits(v)
    }
}

/// GF(q) columns as canonical residues, one word per row.
#[derive(Debug, Clone)]
pub struct GfqColumns {
    q: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl GfqColumns {
    /// `a` must hold residues in `{0, .., q-1}`.
    pub fn new(a: &Matrix, q: u64) -> Self {
        let rows = a.rows();
        let mut data = vec![0u64; rows * a.cols()];
        for r in 0..rows {
            for (c, &v) in a.row(r).iter().enumerate() {
                data[c * rows + r] = v as u64;
            }
        }
        GfqColumns {
            q,
            rows: a.rows(),
            cols: a.cols(),
            data,
        }
    }
}

impl ColumnSpace for GfqColumns {
    fn cols(&self) -> usize {
        self.cols
    }

    fn words(&self) -> usize {
        self.rows
    }

    fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    fn accumulate(&self, out: &mut [u64], base: &[u64], col: usize, alpha: u32) {
        let column = &self.data[col * self.rows..(col + 1) * self.rows];
        let alpha = alpha as u64;
        for ((o, b), c) in out.iter_mut().zip(base).zip(column) {
            *o = (b + alpha * c) % self.q;
        }
    }

    #[inline]
    fn fingerprint(&self, fp: &Fingerprinter, v: &[u64]) -> Fingerprint {
        fp.hash(v)
    }
}

/// Visits each `(U, alpha)` with `|U| = i` once, exposing the combination
/// vector of the current pair.
pub struct CombinationWalker<'a, S: ColumnSpace> {
    space: &'a S,
    subsets: SubsetCursor,
    coefficients: CoefficientCursor,
    support: Vec<u32>,
    partial: Vec<u64>,
    words: usize,
    started: bool,
}

impl<'a, S: ColumnSpace> CombinationWalker<'a, S> {
    pub fn new(space: &'a S, i: usize) -> Self {
        let words = space.words();
        CombinationWalker {
            space,
            subsets: SubsetCursor::new(space.cols(), i),
            coefficients: CoefficientCursor::new(space.modulus() as u32, i),
            support: vec![0; i],
            partial: vec![0; (i + 1) * words],
            words,
            started: false,
        }
    }

    /// Advances to the next pair; `false` once exhausted.
    pub fn advance(&mut self) -> bool {
        let changed = if !self.started {
            self.started = true;
            let Some(t) = self.subsets.advance() else {
                return false;
            };
            self.coefficients.reset();
            self.coefficients.advance();
            t
        } else if let Some(t) = self.coefficients.advance() {
            t
        } else {
            let Some(t) = self.subsets.advance() else {
                return false;
            };
            self.coefficients.reset();
            self.coefficients.advance();
            // An odometer wrap resets every coefficient unless q = 2.
            if self.space.modulus() == 2 {
                t
            } else {
                0
            }
        };
        let i = self.support.len();
        for t in changed..i {
            let col = self.subsets.current()[t];
            self.support[t] = col as u32;
            let (head, tail) = self.partial.split_at_mut((t + 1) * self.words);
            let base = &head[t * self.words..];
            let out = &mut tail[..self.words];
            self.space
                .accumulate(out, base, col, self.coefficients.current()[t]);
        }
        true
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn coefficients(&self) -> &[u32] {
        self.coefficients.current()
    }

    /// Combination vector of the current pair, in the space's storage form.
    pub fn vector(&self) -> &[u64] {
        let i = self.support.len();
        &self.partial[i * self.words..(i + 1) * self.words]
    }
}
