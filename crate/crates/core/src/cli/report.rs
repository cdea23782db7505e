use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::matrix_file::serialize_matrix;
use crate::types::{Algorithm, Matrix, Outcome, ScreenReason, Verdict, Witness};

/// One JSON line per `verify` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub outcome: Outcome,
    pub k: usize,
    pub algorithm: Algorithm,
    pub mode: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub combinations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    /// SHA-256 of the integer matrix handed to the verifier, in file format.
    pub matrix_digest: String,
    pub rows: usize,
    pub cols: usize,
    /// Denominator LCM applied at parse time, as a decimal string.
    pub scale: String,
    pub transposed: bool,
    pub fingerprint_collisions: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modular_prime: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<ScreenReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kruskal_rank: Option<usize>,
}

pub fn matrix_digest(a: &Matrix) -> String {
    hex::encode(Sha256::digest(serialize_matrix(a).as_bytes()))
}

impl ReportRecord {
    pub fn new(
        v: &Verdict,
        a: &Matrix,
        mode: String,
        scale: String,
        transposed: bool,
        timing: bool,
    ) -> Self {
        ReportRecord {
            outcome: v.outcome,
            k: v.k,
            algorithm: v.algorithm,
            mode,
            seed: v.seed,
            witness: v.witness.clone(),
            combinations: v.stats.combinations,
            elapsed_ms: timing.then_some(v.elapsed.as_secs_f64() * 1e3),
            matrix_digest: matrix_digest(a),
            rows: a.rows(),
            cols: a.cols(),
            scale,
            transposed,
            fingerprint_collisions: v.stats.fingerprint_collisions,
            modular_prime: v.stats.modular_prime,
            reason: v.stats.screen,
            kruskal_rank: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Process exit code for this outcome.
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::AtLeastK => 0,
            Outcome::LessThanK => 1,
        }
    }
}
