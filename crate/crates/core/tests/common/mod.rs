//! Test-side reference computations, written without the crate's own
//! elimination or enumeration code.

#![allow(dead_code)]

use kruskal_verify::{ArithmeticMode, Matrix, Witness};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix {
    let entries = (0..rows * cols).map(|_| rng.gen_range(lo..=hi)).collect();
    Matrix::new(rows, cols, entries).unwrap()
}

/// All `s`-subsets of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            go(c + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, s, &mut Vec::new(), &mut out);
    out
}

pub fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn rank_mod(cols: &[Vec<i64>], q: i64) -> usize {
    let d = cols.first().map_or(0, Vec::len);
    // Rows of the transposed system: one vector per column.
    let mut m: Vec<Vec<i64>> = cols
        .iter()
        .map(|c| c.iter().map(|v| v.rem_euclid(q)).collect())
        .collect();
    let mut rank = 0;
    for pos in 0..d {
        let Some(p) = (rank..m.len()).find(|&r| m[r][pos] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = (1..q).find(|x| x * m[rank][pos] % q == 1).unwrap();
        let pivot: Vec<i64> = m[rank].iter().map(|v| v * inv % q).collect();
        for r in 0..m.len() {
            if r != rank && m[r][pos] != 0 {
                let f = m[r][pos];
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = (*x - f * y).rem_euclid(q);
                }
            }
        }
        m[rank] = pivot;
        rank += 1;
    }
    rank
}

fn rank_rational(cols: &[Vec<i64>]) -> usize {
    let d = cols.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> = cols
        .iter()
        .map(|c| {
            c.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for pos in 0..d {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][pos].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for r in rank + 1..m.len() {
            if !m[r][pos].is_zero() {
                let f = &m[r][pos] / &pivot[pos];
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = &*x - &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the columns `subset` of `a` in `mode`.
pub fn subset_rank(a: &Matrix, mode: ArithmeticMode, subset: &[usize]) -> usize {
    let cols: Vec<Vec<i64>> = subset.iter().map(|&c| a.column(c).collect()).collect();
    match mode.modulus() {
        Some(q) => rank_mod(&cols, q as i64),
        None => rank_rational(&cols),
    }
}

/// Kruskal rank by checking every subset, smallest first.
pub fn brute_kruskal_rank(a: &Matrix, mode: ArithmeticMode) -> usize {
    for s in 1..=a.cols() {
        if all_subsets(a.cols(), s)
            .iter()
            .any(|sub| subset_rank(a, mode, sub) < s)
        {
            return s - 1;
        }
    }
    a.cols()
}

/// Whether every set of `k` columns is independent (false when `k > n`).
pub fn brute_at_least(a: &Matrix, mode: ArithmeticMode, k: usize) -> bool {
    k <= a.cols()
        && all_subsets(a.cols(), k)
            .iter()
            .all(|sub| subset_rank(a, mode, sub) == k)
}

/// Checks `A x = 0`, `x != 0` and `|supp x| <= k` with i128 / modular
/// arithmetic independent of the crate.
pub fn witness_holds(a: &Matrix, mode: ArithmeticMode, w: &Witness, k: usize) -> bool {
    if w.is_empty() || w.len() > k || w.support().iter().any(|&c| c >= a.cols()) {
        return false;
    }
    let q = mode.modulus().map(|q| q as i128);
    let reduce = |v: i128| q.map_or(v, |q| v.rem_euclid(q));
    if w.coefficients().iter().all(|&c| reduce(c as i128) == 0) {
        return false;
    }
    (0..a.rows()).all(|r| {
        let s = w.iter().fold(0i128, |acc, (c, x)| {
            reduce(acc + a.get(r, c) as i128 * x as i128)
        });
        s == 0
    })
}

/// Every vector `sum alpha_c A_c` with `|S| = j`, `S` within `0..prefix`,
/// `alpha_c in [-m, m] \ {0}`.
pub fn brute_reach(
    a: &Matrix,
    prefix: usize,
    j: usize,
    m: i64,
) -> std::collections::BTreeSet<Vec<i64>> {
    let alphas: Vec<i64> = (-m..=m).filter(|&x| x != 0).collect();
    let mut out = std::collections::BTreeSet::new();
    for sub in all_subsets(prefix, j) {
        let mut idx = vec![0usize; j];
        loop {
            let mut v = vec![0i64; a.rows()];
            for (t, &c) in sub.iter().enumerate() {
                for (r, slot) in v.iter_mut().enumerate() {
                    *slot += alphas[idx[t]] * a.get(r, c);
                }
            }
            out.insert(v);
            let mut t = 0;
            while t < j {
                idx[t] += 1;
                if idx[t] < alphas.len() {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == j {
                break;
            }
        }
    }
    out
}

/// Some column equals a bounded combination of at most `k - 1` earlier
/// columns (coefficients in `[-m, m] \ {0}`), or `k > n`.
pub fn brute_bounded_dependency(a: &Matrix, k: usize, m: i64) -> bool {
    if k > a.cols() {
        return true;
    }
    (0..a.cols()).any(|i| {
        let col: Vec<i64> = a.column(i).collect();
        (0..k.min(i + 1)).any(|j| brute_reach(a, i, j, m).contains(&col))
    })
}

pub fn gcd_normalized(x: &[i64]) -> Vec<i64> {
    let g = x.iter().fold(0i64, |g, &v| num_integer::gcd(g, v));
    let sign = x.iter().find(|&&v| v != 0).map_or(1, |v| v.signum());
    x.iter().map(|v| v / g * sign).collect()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}
