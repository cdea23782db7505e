//! Seeded fingerprints of combination vectors and the collision index that
//! stores which `(U, alpha)` produced each fingerprint.
//!
//! Fingerprints are polynomial digests `sum_j v_j r^(L-j) mod P` over a
//! Mersenne prime `P` (`2^61 - 1` or `2^127 - 1`) with a seeded evaluation
//! point `r`. Two distinct vectors of length `L` collide with probability at
//! most `L / P`. Every collision is confirmed exactly by the caller, so a
//! false match only costs time.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::FingerprintWidth;

const P61: u64 = (1 << 61) - 1;
const P127: u128 = (1 << 127) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub u128);

#[inline]
fn mul_mod61(a: u64, b: u64) -> u64 {
    let x = a as u128 * b as u128;
    let s = (x as u64 & P61) + (x >> 61) as u64;
    let s = (s & P61) + (s >> 61);
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn add_mod61(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn fold127(x: u128) -> u128 {
    let s = (x & P127) + (x >> 127);
    if s >= P127 {
        s - P127
    } else {
        s
    }
}

/// `a * b mod 2^127 - 1` for `a, b < 2^127`.
#[inline]
pub(crate) fn mul_mod127(a: u128, b: u128) -> u128 {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let p00 = a0 * b0;
    let mid = a0 * b1 + a1 * b0;
    let p11 = a1 * b1;
    let (lo, carry) = p00.overflowing_add(mid << 64);
    let hi = p11 + (mid >> 64) + carry as u128;
    // value = hi * 2^128 + lo, and 2^128 = 2 (mod P127).
    let lo = fold127(lo);
    let hi = fold127(hi);
    let hi2 = fold127(hi << 1);
    fold127(lo + hi2)
}

/// Seeded polynomial digest. Elements must be below `2^61`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprinter {
    width: FingerprintWidth,
    point: u128,
}

impl Fingerprinter {
    pub fn new(width: FingerprintWidth, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = match width {
            FingerprintWidth::W64 => rng.gen_range(2..P61) as u128,
            FingerprintWidth::W128 => rng.gen_range(2..P127),
        };
        Fingerprinter { width, point }
    }

    pub fn width(&self) -> FingerprintWidth {
        self.width
    }

    #[inline]
    pub fn hash_iter<I: IntoIterator<Item = u64>>(&self, elements: I) -> Fingerprint {
        match self.width {
            FingerprintWidth::W64 => {
                let r = self.point as u64;
                let mut h = 0u64;
                for e in elements {
                    debug_assert!(e < P61);
                    h = add_mod61(mul_mod61(h, r), e);
                }
                Fingerprint(h as u128)
            }
            FingerprintWidth::W128 => {
                let r = self.point;
                let mut h = 0u128;
                for e in elements {
                    h = fold127(mul_mod127(h, r) + e as u128);
                }
                Fingerprint(h)
            }
        }
    }

    /// Digest of a vector of field residues.
    #[inline]
    pub fn hash(&self, v: &[u64]) -> Fingerprint {
        self.hash_iter(v.iter().copied())
    }

    /// Digest of a bit-packed GF(2) vector, read as 32-bit limbs.
    #[inline]
    pub fn hash_bits(&self, words: &[u64]) -> Fingerprint {
        self.hash_iter(words.iter().flat_map(|&w| [w & 0xffff_ffff, w >> 32]))
    }
}

/// One-shot fingerprint of a residue vector.
pub fn fingerprint(v: &[u64], seed: u64, width: FingerprintWidth) -> Fingerprint {
    Fingerprinter::new(width, seed).hash(v)
}

/// Hasher for fingerprint keys: they are already uniformly spread.
#[derive(Default)]
pub struct FingerprintHasher(u64);

impl Hasher for FingerprintHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = v.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }

    fn write_u128(&mut self, v: u128) {
        self.0 = (v as u64 ^ (v >> 64) as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntryId(u32);

/// Borrowed view of a stored `(U, alpha)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryRef<'a> {
    pub support: &'a [u32],
    pub coefficients: &'a [u32],
}

const NIL: u32 = u32::MAX;

/// Fingerprint-keyed store of generating pairs. Entries live in a flat arena
/// and buckets are intrusive linked lists, so an insertion allocates nothing
/// beyond amortized arena growth.
#[derive(Debug, Clone)]
pub struct CollisionIndex {
    heads: HashMap<Fingerprint, u32, BuildHasherDefault<FingerprintHasher>>,
    next: Vec<u32>,
    spans: Vec<(u32, u32)>,
    support: Vec<u32>,
    coefficients: Vec<u32>,
    seed: u64,
}

impl CollisionIndex {
    pub fn new(seed: u64) -> Self {
        Self::with_capacity(seed, 0)
    }

    pub fn with_capacity(seed: u64, entries: usize) -> Self {
        CollisionIndex {
            heads: HashMap::with_capacity_and_hasher(entries, Default::default()),
            next: Vec::with_capacity(entries),
            spans: Vec::with_capacity(entries),
            support: Vec::new(),
            coefficients: Vec::new(),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn entry(&self, id: EntryId) -> EntryRef<'_> {
        let (start, len) = self.spans[id.0 as usize];
        let range = start as usize..(start + len) as usize;
        EntryRef {
            support: &self.support[range.clone()],
            coefficients: &self.coefficients[range],
        }
    }

    /// Entries stored under `fp`, most recent first.
    pub fn probe(&self, fp: Fingerprint) -> impl Iterator<Item = EntryId> + '_ {
        let mut cur = self.heads.get(&fp).copied().unwrap_or(NIL);
        std::iter::from_fn(move || {
            if cur == NIL {
                return None;
            }
            let id = cur;
            cur = self.next[id as usize];
            Some(EntryId(id))
        })
    }

    pub fn insert(&mut self, fp: Fingerprint, support: &[u32], coefficients: &[u32]) -> EntryId {
        assert_eq!(support.len(), coefficients.len());
        let id = u32::try_from(self.spans.len())
            .ok()
            .filter(|&id| id != NIL)
            .expect("collision index exceeds 2^32 entries");
        let start = u32::try_from(self.support.len()).expect("collision arena exceeds 2^32 cells");
        self.support.extend_from_slice(support);
        self.coefficients.extend_from_slice(coefficients);
        self.spans.push((start, support.len() as u32));
        let head = self.heads.entry(fp).or_insert(NIL);
        self.next.push(*head);
        *head = id;
        EntryId(id)
    }

    /// Returns every entry already stored under `fp`, then stores the new
    /// entry iff `do_insert`. The lookup precedes the insertion, so an entry
    /// never collides with itself.
    pub fn probe_then_insert(
        &mut self,
        fp: Fingerprint,
        support: &[u32],
        coefficients: &[u32],
        do_insert: bool,
    ) -> Vec<EntryId> {
        let hits: Vec<EntryId> = self.probe(fp).collect();
        if do_insert {
            self.insert(fp, support, coefficients);
        }
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn fingerprint_is_deterministic() {
        for width in [FingerprintWidth::W64, FingerprintWidth::W128] {
            let v = [1u64, 0, 4, 2, 2];
            assert_eq!(fingerprint(&v, 7, width), fingerprint(&v, 7, width));
            let zero = [0u64; 5];
            // The zero vector is an ordinary key.
            let _ = fingerprint(&zero, 7, width);
        }
    }

    #[test]
    fn random_pairs_do_not_collide() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fp = Fingerprinter::new(FingerprintWidth::W64, 3);
        let mut collisions = 0;
        for _ in 0..10_000 {
            let v: Vec<u64> = (0..16).map(|_| rng.gen_range(0..5)).collect();
            let mut w = v.clone();
            let j = rng.gen_range(0..16);
            w[j] = (w[j] + rng.gen_range(1..5)) % 5;
            if fp.hash(&v) == fp.hash(&w) {
                collisions += 1;
            }
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn bit_and_residue_digests_are_separate_views() {
        let fp = Fingerprinter::new(FingerprintWidth::W128, 5);
        assert_eq!(fp.hash_bits(&[0x0000_0002_0000_0001]), fp.hash(&[1, 2]));
    }

    #[test]
    fn probe_on_empty_index() {
        let mut idx = CollisionIndex::new(0);
        assert!(idx
            .probe_then_insert(Fingerprint(9), &[], &[], false)
            .is_empty());
        assert!(idx.is_empty());
    }

    #[test]
    fn probe_returns_prior_entries() {
        let mut idx = CollisionIndex::new(0);
        let fp = Fingerprint(42);
        assert!(idx.probe_then_insert(fp, &[0, 2], &[1, 1], true).is_empty());
        let hits = idx.probe_then_insert(fp, &[1], &[1], true);
        assert_eq!(hits.len(), 1);
        let e = idx.entry(hits[0]);
        assert_eq!(e.support, &[0, 2]);
        assert_eq!(e.coefficients, &[1, 1]);
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.probe(fp).count(), 2);
        assert_eq!(idx.probe(Fingerprint(43)).count(), 0);
    }

    #[test]
    fn probe_only_leaves_index_unchanged() {
        let mut idx = CollisionIndex::new(0);
        idx.insert(Fingerprint(1), &[0], &[1]);
        let before = idx.len();
        let hits = idx.probe_then_insert(Fingerprint(1), &[3, 4], &[1, 1], false);
        assert_eq!(hits.len(), 1);
        assert_eq!(idx.len(), before);
    }

    fn big(x: u128) -> BigUint {
        BigUint::from(x)
    }

    proptest! {
        #[test]
        fn mul_mod127_matches_bigint(a in 0u128..P127, b in 0u128..P127) {
            let expect = (big(a) * big(b)) % big(P127);
            prop_assert_eq!(big(mul_mod127(a, b)), expect);
        }

        #[test]
        fn mul_mod61_matches_bigint(a in 0u64..P61, b in 0u64..P61) {
            let expect = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(P61);
            prop_assert_eq!(BigUint::from(mul_mod61(a, b)), expect);
        }

        #[test]
        fn digest_matches_polynomial(v in proptest::collection::vec(0u64..1000, 1..8), seed: u64) {
            let fp = Fingerprinter::new(FingerprintWidth::W128, seed);
            let r = big(fp.point);
            let p = big(P127);
            let mut h = BigUint::from(0u32);
            for &e in &v {
                h = (h * &r + BigUint::from(e)) % &p;
            }
            prop_assert_eq!(big(fp.hash(&v).0), h);
        }
    }
}
