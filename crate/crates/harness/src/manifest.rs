//! Run manifest: everything needed to reproduce an invocation exactly.
//!
//! Deliberately timestamp-free so identical runs produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::trace::write_atomic;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub config_path: String,
    pub config_sha256: String,
    pub seed: u64,
    pub reps: usize,
    pub rep_seeds: Vec<u64>,
    pub outputs: Vec<String>,
}

pub fn config_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Runtime(format!("manifest encode failed: {e}")))?;
        write_atomic(path, &json)
    }
}

/// Distinct per-repetition seeds derived from the base seed.
pub fn rep_seed(base: u64, rep: usize) -> u64 {
    // SplitMix64 step keeps the seeds well separated.
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(rep as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rep_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..16).map(|r| rep_seed(42, r)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
        assert_eq!(rep_seed(42, 3), rep_seed(42, 3));
        assert_ne!(rep_seed(42, 3), rep_seed(43, 3));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash(b"abc"), config_hash(b"abc"));
        assert_ne!(config_hash(b"abc"), config_hash(b"abd"));
        assert_eq!(config_hash(b"abc").len(), 64);
    }
}
