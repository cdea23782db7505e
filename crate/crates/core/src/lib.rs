//! Witness-producing verification of Kruskal rank.
//!
//! Given a matrix `A` and a rank parameter `k`, every verifier in this crate
//! decides whether every set of at most `k` columns of `A` is linearly
//! independent. A negative answer always carries a sparse dependency
//! `x != 0`, `|supp(x)| <= k`, `A x = 0`, which is checked exactly before it
//! is reported.
//!
//! * [`verifiers::verify_gf2`], [`verifiers::verify_gfq`] and
//!   [`verifiers::verify_integer`] are the meet-in-the-middle hashing
//!   verifiers over GF(2), GF(q) and the integers.
//! * [`dp::verify_dp`] is the deterministic bounded-coefficient dynamic
//!   program.
//! * [`oracle::oracle_kruskal_rank`] is the exhaustive exact reference.
//! * [`cli`] holds the matrix file format, JSON reports and benchmarks used by
//!   the `kruskal` binary.

pub mod cli;
pub mod dp;
pub mod enumeration;
pub mod error;
pub mod gf;
pub mod hashing;
pub mod oracle;
pub mod types;
pub mod verifiers;

pub use error::{Error, Result};
pub use types::{
    trivial_screen, verify_witness, Algorithm, ArithmeticMode, FingerprintWidth, Matrix, Outcome,
    RunStats, Verdict, VerifyConfig, Witness,
};
