//! Prime-field arithmetic and the prime sets used by the integer verifier.

use num_bigint::BigUint;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::Matrix;

/// Largest modulus accepted for field arithmetic. Products of two residues
/// must fit comfortably in `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Largest sieve bound the prime selector will enumerate.
pub const MAX_SIEVE_BOUND: u64 = 1 << 28;

/// A prime below [`MAX_MODULUS`], checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(Error::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Prime(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// Deterministic trial-division primality test; inputs here stay below 2^31.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut f = 5u64;
    while f * f <= n {
        if n.is_multiple_of(f) || n.is_multiple_of(f + 2) {
            return false;
        }
        f += 6;
    }
    true
}

/// Arithmetic in Z/qZ on canonical residues `0..q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        Ok(PrimeField {
            q: Prime::new(q)?.get(),
        })
    }

    pub fn from_prime(p: Prime) -> Self {
        PrimeField { q: p.get() }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }
}

/// The field operations of GF(q).
pub fn field_ops(q: u64) -> Result<PrimeField> {
    PrimeField::new(q)
}

/// Entry-wise reduction into canonical residues modulo the prime `p`.
pub fn mod_reduce_matrix(a: &Matrix, p: u64) -> Result<Matrix> {
    let field = PrimeField::new(p)?;
    let entries = a
        .entries()
        .iter()
        .map(|&v| field.reduce(v) as i64)
        .collect();
    Matrix::new(a.rows(), a.cols(), entries)
}

/// Sieve of Eratosthenes: all primes `<= bound` in increasing order.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let len = bound as usize + 1;
    let mut composite = vec![false; len];
    let mut out = Vec::new();
    for i in 2..len {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j < len {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Smallest `B` with at least `count` primes in `[2, B]`, i.e. the
/// `count`-th prime.
pub fn nth_prime(count: usize) -> Result<u64> {
    if count == 0 {
        return Ok(2);
    }
    // Rosser: p_n < n (ln n + ln ln n) for n >= 6.
    let c = count.max(6) as f64;
    let mut bound = (c * (c.ln() + c.ln().ln())).ceil() as u64 + 16;
    loop {
        if bound > MAX_SIEVE_BOUND {
            return Err(Error::Resource(format!(
                "{count} primes need a sieve beyond {MAX_SIEVE_BOUND}"
            )));
        }
        let primes = primes_up_to(bound);
        if primes.len() >= count {
            return Ok(primes[count - 1]);
        }
        bound *= 2;
    }
}

/// Distinct primes drawn for the integer verifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    primes: Vec<u64>,
    source_bound: u64,
    requested_count: usize,
}

impl PrimeSet {
    /// Sorted, duplicate-free.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn source_bound(&self) -> u64 {
        self.source_bound
    }

    pub fn requested_count(&self) -> usize {
        self.requested_count
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

/// Samples `count` primes uniformly without replacement from `[2, bound]`,
/// deterministically in `seed`. Returns every prime in range when fewer than
/// `count` exist.
pub fn select_primes(count: usize, bound: u64, seed: u64) -> Result<PrimeSet> {
    if count == 0 {
        return Err(Error::Argument("prime count must be at least 1".into()));
    }
    if bound < 2 {
        return Err(Error::Argument(format!("prime bound {bound} is below 2")));
    }
    if bound > MAX_SIEVE_BOUND {
        return Err(Error::Resource(format!(
            "prime bound {bound} exceeds sieve limit {MAX_SIEVE_BOUND}"
        )));
    }
    let pool = primes_up_to(bound);
    let mut primes: Vec<u64> = if pool.len() <= count {
        pool
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        index::sample(&mut rng, pool.len(), count)
            .into_iter()
            .map(|i| pool[i])
            .collect()
    };
    primes.sort_unstable();
    Ok(PrimeSet {
        primes,
        source_bound: bound,
        requested_count: count,
    })
}

/// Default prime count `ceil(4 (k log2(x + 2) + 7))`, where `x` is the
/// magnitude bound `k m M n` of a difference of two combination vectors.
pub fn default_prime_count(k: usize, m: u64, bound_m: &BigUint, n: usize) -> usize {
    let x = BigUint::from(k) * BigUint::from(m) * bound_m * BigUint::from(n) + 2u32;
    (4.0 * (k as f64 * log2_biguint(&x) + 7.0)).ceil() as usize
}

/// Source bound for `count` primes on a matrix with `n` columns: at least
/// `n`, and large enough to hold `2 count` primes so sampling stays random.
pub fn prime_source_bound(n: usize, count: usize) -> Result<u64> {
    let needed = count
        .checked_mul(2)
        .ok_or_else(|| Error::Overflow("prime count".into()))?;
    Ok((n as u64).max(nth_prime(needed)?).max(2))
}

/// `log2` of an arbitrary-precision integer, exact to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        let v: u64 = x.iter_u64_digits().next().unwrap_or(0);
        return (v as f64).log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let v: u64 = top.iter_u64_digits().next().unwrap_or(0);
    (v as f64).log2() + shift as f64
}

/// Mixes a master seed with a stream index into an independent seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
