//! Meet-in-the-middle hashing verifiers over GF(2), GF(q) and the integers.
//!
//! A dependency `x` with `|supp(x)| <= k` splits as `x = y - z` with
//! `|supp(y)| <= floor(k/2)` and `|supp(z)| <= ceil(k/2)`. Phase `i` walks
//! every `(U, alpha)` with `|U| = i`, probes the collision index with the
//! fingerprint of `sum alpha_t A[:, U_t]`, and stores the pair when
//! `2i <= k`. Any stored pair whose fingerprint matches is turned into the
//! candidate `y - z` and checked exactly; fingerprint coincidences are
//! discarded and the walk continues.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::One;

use crate::enumeration::{
    combination_count, ColumnSpace, CombinationWalker, Gf2Columns, GfqColumns,
};
use crate::error::Result;
use crate::gf::{
    default_prime_count, derive_seed, log2_biguint, mod_reduce_matrix, prime_source_bound,
    select_primes, Prime, PrimeField, PrimeSet,
};
use crate::hashing::{CollisionIndex, Fingerprinter};
use crate::oracle::exact_nullspace_vector;
use crate::types::{
    trivial_screen, verify_witness, Algorithm, ArithmeticMode, Matrix, RunStats, Verdict,
    VerifyConfig, Witness,
};

/// Coefficient magnitude bound `M = ((r-1)! m^(r-1))^2` for integer
/// dependencies on `r` columns with entries bounded by `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBound {
    pub r: usize,
    pub m: u64,
    pub value: BigUint,
    pub log2: f64,
}

pub fn coefficient_bound(r: usize, m: u64) -> CoefficientBound {
    assert!(r >= 1, "dependency size must be positive");
    let mut root = BigUint::one();
    for t in 2..r {
        root *= t as u64;
    }
    root *= BigUint::from(m).pow((r - 1) as u32);
    let mut value = &root * &root;
    // m = 0 with r >= 2 makes the product vanish; only the zero matrix gets
    // here and any coefficient works, so use 1.
    if value == BigUint::ZERO {
        value = BigUint::one();
    }
    let log2 = log2_biguint(&value);
    CoefficientBound { r, m, value, log2 }
}

/// Largest capacity pre-reserved for a collision index.
const INDEX_RESERVE_CAP: u128 = 1 << 22;

fn index_reserve(n: usize, k: usize, q: u64) -> usize {
    combination_count(n, k & !1, q).min(INDEX_RESERVE_CAP) as usize
}

/// `y - z` over GF(q) from two sorted `(support, coefficients)` pairs, with
/// the leading coefficient scaled to 1. `None` if the difference vanishes.
fn difference_witness(
    field: PrimeField,
    y: (&[u32], &[u32]),
    z: (&[u32], &[u32]),
) -> Option<Witness> {
    let mut pairs: Vec<(usize, u64)> = Vec::with_capacity(y.0.len() + z.0.len());
    let (mut a, mut b) = (0, 0);
    while a < y.0.len() || b < z.0.len() {
        let ya = y.0.get(a).copied().unwrap_or(u32::MAX);
        let zb = z.0.get(b).copied().unwrap_or(u32::MAX);
        if ya < zb {
            pairs.push((ya as usize, y.1[a] as u64));
            a += 1;
        } else if zb < ya {
            pairs.push((zb as usize, field.neg(z.1[b] as u64)));
            b += 1;
        } else {
            pairs.push((ya as usize, field.sub(y.1[a] as u64, z.1[b] as u64)));
            a += 1;
            b += 1;
        }
    }
    pairs.retain(|&(_, c)| c != 0);
    let lead = pairs.first()?.1;
    let inv = field.inv(lead)?;
    let (support, coefficients) = pairs
        .into_iter()
        .map(|(c, v)| (c, field.mul(v, inv) as i64))
        .unzip();
    Witness::new(support, coefficients).ok()
}

/// Runs the phased walk over one field. `on_dependency` receives every
/// exactly-confirmed dependency and decides whether to stop.
#[allow(clippy::too_many_arguments)]
fn mitm_search<S, B, F>(
    residues: &Matrix,
    mode: ArithmeticMode,
    space: &S,
    k: usize,
    fingerprinter: &Fingerprinter,
    index_seed: u64,
    stats: &mut RunStats,
    mut on_dependency: F,
) -> Result<Option<B>>
where
    S: ColumnSpace,
    F: FnMut(Witness, &mut RunStats) -> Result<ControlFlow<B>>,
{
    let q = space.modulus();
    let field = PrimeField::new(q)?;
    let mut index = CollisionIndex::with_capacity(index_seed, index_reserve(space.cols(), k, q));
    for i in 0..=k.div_ceil(2) {
        let insert = 2 * i <= k;
        let mut walker = CombinationWalker::new(space, i);
        while walker.advance() {
            stats.combinations += 1;
            let fp = space.fingerprint(fingerprinter, walker.vector());
            let hits = index.probe_then_insert(fp, walker.support(), walker.coefficients(), insert);
            for id in hits {
                stats.fingerprint_collisions += 1;
                let stored = index.entry(id);
                let candidate = difference_witness(
                    field,
                    (stored.support, stored.coefficients),
                    (walker.support(), walker.coefficients()),
                );
                let confirmed = match candidate {
                    Some(w) if verify_witness(residues, mode, &w)? => w,
                    _ => {
                        stats.false_matches += 1;
                        continue;
                    }
                };
                if let ControlFlow::Break(b) = on_dependency(confirmed, stats)? {
                    return Ok(Some(b));
                }
            }
        }
    }
    Ok(None)
}

fn stop_at_first(w: Witness, _: &mut RunStats) -> Result<ControlFlow<Witness>> {
    Ok(ControlFlow::Break(w))
}

fn screened(a: &Matrix, cfg: &VerifyConfig, algorithm: Algorithm) -> Option<Verdict> {
    trivial_screen(a, cfg.k).map(|v| v.retag(algorithm, cfg.seed))
}

/// Hashing verifier over GF(2). Entries must be 0 or 1.
pub fn verify_gf2(a: &Matrix, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    a.check_residues(ArithmeticMode::Gf2)?;
    let start = Instant::now();
    if let Some(v) = screened(a, cfg, Algorithm::HashGf2) {
        return Ok(v.with_elapsed(start.elapsed()));
    }
    let space = Gf2Columns::new(a);
    let fingerprinter = Fingerprinter::new(cfg.fingerprint_width, derive_seed(cfg.seed, 0));
    let mut stats = RunStats::default();
    let found = mitm_search(
        a,
        ArithmeticMode::Gf2,
        &space,
        cfg.k,
        &fingerprinter,
        cfg.seed,
        &mut stats,
        stop_at_first,
    )?;
    Ok(finish(found, cfg, Algorithm::HashGf2, stats).with_elapsed(start.elapsed()))
}

/// Hashing verifier over GF(q). Entries must be canonical residues; `q = 2`
/// runs [`verify_gf2`].
pub fn verify_gfq(a: &Matrix, q: u64, cfg: &VerifyConfig) -> Result<Verdict> {
    let prime = Prime::new(q)?;
    if q == 2 {
        return verify_gf2(a, cfg);
    }
    cfg.validate()?;
    let mode = ArithmeticMode::Gfq(prime);
    a.check_residues(mode)?;
    let start = Instant::now();
    if let Some(v) = screened(a, cfg, Algorithm::HashGfq) {
        return Ok(v.with_elapsed(start.elapsed()));
    }
    let space = GfqColumns::new(a, q);
    let fingerprinter = Fingerprinter::new(cfg.fingerprint_width, derive_seed(cfg.seed, 0));
    let mut stats = RunStats::default();
    let found = mitm_search(
        a,
        mode,
        &space,
        cfg.k,
        &fingerprinter,
        cfg.seed,
        &mut stats,
        stop_at_first,
    )?;
    Ok(finish(found, cfg, Algorithm::HashGfq, stats).with_elapsed(start.elapsed()))
}

fn finish(
    found: Option<Witness>,
    cfg: &VerifyConfig,
    algorithm: Algorithm,
    stats: RunStats,
) -> Verdict {
    match found {
        Some(w) => Verdict::less_than(cfg.k, w, algorithm, cfg.seed, stats),
        None => Verdict::at_least(cfg.k, algorithm, cfg.seed, stats),
    }
}

/// How the integer verifier sizes its prime set.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimePlan {
    pub coefficient_bound: CoefficientBound,
    pub primes: PrimeSet,
}

/// Coefficient bound for `r = k`, the prime count and bound, and the sampled
/// prime set, all derived from `cfg`.
pub fn plan_primes(a: &Matrix, cfg: &VerifyConfig) -> Result<PrimePlan> {
    let bound = coefficient_bound(cfg.k, a.entry_bound());
    let count = cfg
        .prime_count_override
        .unwrap_or_else(|| default_prime_count(cfg.k, a.entry_bound(), &bound.value, a.cols()));
    let source = match cfg.max_prime_bound_override {
        Some(b) => b,
        None => prime_source_bound(a.cols(), count)?,
    };
    let primes = select_primes(count, source, derive_seed(cfg.seed, u64::MAX))?;
    Ok(PrimePlan {
        coefficient_bound: bound,
        primes,
    })
}

#[derive(Debug)]
enum PrimeReport {
    /// No mod-p dependency of size `<= k`.
    Clean,
    /// Mod-p dependencies only, none of them rational.
    Spurious,
    /// A rational dependency found from a mod-p candidate support.
    Rational(Witness),
}

fn run_prime(
    a: &Matrix,
    p: u64,
    rank: usize,
    cfg: &VerifyConfig,
) -> Result<(PrimeReport, RunStats)> {
    let residues = mod_reduce_matrix(a, p)?;
    let mode = ArithmeticMode::gfq(p)?;
    let seed = derive_seed(cfg.seed, rank as u64 + 1);
    let fingerprinter = Fingerprinter::new(cfg.fingerprint_width, seed);
    let mut stats = RunStats::default();
    let mut checked: HashSet<Vec<usize>> = HashSet::new();
    let mut saw_modular = false;
    let mut confirm = |w: Witness, stats: &mut RunStats| -> Result<ControlFlow<Witness>> {
        saw_modular = true;
        if !checked.insert(w.support().to_vec()) {
            return Ok(ControlFlow::Continue(()));
        }
        let cols = a.select_columns(w.support())?;
        if let Some(x) = exact_nullspace_vector(&cols, ArithmeticMode::Integer)? {
            let pairs = w.support().iter().copied().zip(x).collect();
            if let Some(iw) = Witness::from_pairs(pairs) {
                if verify_witness(a, ArithmeticMode::Integer, &iw)? {
                    return Ok(ControlFlow::Break(iw));
                }
            }
        }
        stats.spurious_modular += 1;
        Ok(ControlFlow::Continue(()))
    };
    let found = if p == 2 {
        let space = Gf2Columns::new(&residues);
        mitm_search(
            &residues,
            mode,
            &space,
            cfg.k,
            &fingerprinter,
            seed,
            &mut stats,
            &mut confirm,
        )?
    } else {
        let space = GfqColumns::new(&residues, p);
        mitm_search(
            &residues,
            mode,
            &space,
            cfg.k,
            &fingerprinter,
            seed,
            &mut stats,
            &mut confirm,
        )?
    };
    let report = match found {
        Some(w) => PrimeReport::Rational(w),
        None if saw_modular => PrimeReport::Spurious,
        None => PrimeReport::Clean,
    };
    Ok((report, stats))
}

/// Hashing verifier over the integers.
///
/// Each sampled prime runs an independent GF(p) walk on `A mod p`. A prime
/// with no mod-p dependency proves the Kruskal rank is at least `k`. Every
/// confirmed mod-p dependency has its support re-checked by exact integer
/// elimination; a rational kernel vector there is returned as the witness.
/// Primes are consumed in increasing order (in batches of `cfg.threads`) and
/// the first decisive one settles the verdict; if every prime only produced
/// spurious dependencies the answer is "at least k".
pub fn verify_integer(a: &Matrix, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let start = Instant::now();
    if let Some(v) = screened(a, cfg, Algorithm::HashInteger) {
        return Ok(v.with_elapsed(start.elapsed()));
    }
    let plan = plan_primes(a, cfg)?;
    let primes = plan.primes.primes();
    let mut total = RunStats::default();
    for (batch_no, batch) in primes.chunks(cfg.threads).enumerate() {
        let base = batch_no * cfg.threads;
        let reports: Vec<Result<(PrimeReport, RunStats)>> = if batch.len() == 1 {
            vec![run_prime(a, batch[0], base, cfg)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| scope.spawn(move || run_prime(a, p, base + j, cfg)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("prime worker panicked"))
                    .collect()
            })
        };
        for (j, report) in reports.into_iter().enumerate() {
            let (report, stats) = report?;
            total.combinations += stats.combinations;
            total.fingerprint_collisions += stats.fingerprint_collisions;
            total.false_matches += stats.false_matches;
            total.spurious_modular += stats.spurious_modular;
            total.primes_tried += 1;
            match report {
                PrimeReport::Spurious => {}
                PrimeReport::Clean => {
                    let v = Verdict::at_least(cfg.k, Algorithm::HashInteger, cfg.seed, total);
                    return Ok(v.with_elapsed(start.elapsed()));
                }
                PrimeReport::Rational(w) => {
                    total.modular_prime = Some(batch[j]);
                    let v = Verdict::less_than(cfg.k, w, Algorithm::HashInteger, cfg.seed, total);
                    return Ok(v.with_elapsed(start.elapsed()));
                }
            }
        }
    }
    Ok(
        Verdict::at_least(cfg.k, Algorithm::HashInteger, cfg.seed, total)
            .with_elapsed(start.elapsed()),
    )
}

/// Dispatches to the hashing verifier for `mode`.
pub fn verify_hash(a: &Matrix, mode: ArithmeticMode, cfg: &VerifyConfig) -> Result<Verdict> {
    match mode {
        ArithmeticMode::Gf2 => verify_gf2(a, cfg),
        ArithmeticMode::Gfq(p) => verify_gfq(a, p.get(), cfg),
        ArithmeticMode::Integer => verify_integer(a, cfg),
    }
}
