//! Run manifests: config snapshot, artifact hashes and diagnostics.
//!
//! The manifest is the only file that carries wall-clock time, so every other
//! artifact of a run is a pure function of (config, seed).

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::report::{Artifacts, Diagnostics};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub seed: u64,
    /// The effective config, after CLI overrides, as TOML.
    pub config: String,
    /// File name → lowercase hex SHA-256.
    pub artifacts: BTreeMap<String, String>,
    #[serde(serialize_with = "crate::report::float")]
    pub wall_clock_seconds: f64,
    pub diagnostics: Diagnostics,
    /// Diagnostics or report cells that came out NaN.
    pub nan_flags: Vec<String>,
    /// Named invariant checks and whether they held.
    pub checks: BTreeMap<String, bool>,
    /// Task indices that failed (panic or error) in a parallel stage.
    pub failed_tasks: Vec<usize>,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn assemble(
        kind: &str,
        seed: u64,
        config: String,
        artifacts: &Artifacts,
        wall_clock_seconds: f64,
        diagnostics: Diagnostics,
        mut nan_flags: Vec<String>,
        checks: BTreeMap<String, bool>,
        failed_tasks: Vec<usize>,
    ) -> Self {
        let hashes = artifacts.written.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect();
        nan_flags.extend(diagnostics.nan_keys());
        nan_flags.sort();
        nan_flags.dedup();
        let passed = checks.values().all(|&c| c) && failed_tasks.is_empty();
        RunManifest {
            kind: kind.to_string(),
            seed,
            config,
            artifacts: hashes,
            wall_clock_seconds,
            diagnostics,
            nan_flags,
            checks,
            failed_tasks,
            passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn failures_clear_passed() {
        let a = Artifacts::default();
        let mut checks = BTreeMap::new();
        checks.insert("x".to_string(), true);
        let mut d = Diagnostics::default();
        d.set("drift", f64::NAN);
        let m = RunManifest::assemble("evolve", 1, String::new(), &a, 0.0, d.clone(), vec![], checks.clone(), vec![]);
        assert!(m.passed);
        assert_eq!(m.nan_flags, vec!["drift".to_string()]);
        let m = RunManifest::assemble("evolve", 1, String::new(), &a, 0.0, d, vec![], checks, vec![3]);
        assert!(!m.passed);
    }
}
