//! Persistence: versioned CSV metrics and JSON run manifests.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// SHA-256 of raw bytes, hex-encoded; identifies model/config files in
/// manifests.
pub fn content_hash_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Writes a metrics CSV: one schema comment line, a header row, then data
/// rows. UTF-8, `\n` endings, `.` decimal separator via plain float
/// formatting, so identical inputs give identical bytes.
pub fn write_metrics_csv(
    path: &Path,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!("# schema_version={CSV_SCHEMA_VERSION}\n"));
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(buf.as_bytes())
}

/// Run manifest persisted next to the metric files. `wall_clock_ms` is the
/// only field expected to vary between reruns of the same seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    /// Content hash of the model file or generated model JSON.
    pub model_hash: String,
    pub total_samples: u64,
    pub wall_clock_ms: u128,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes"))
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Equality modulo the wall clock, for determinism checks.
    pub fn same_outputs(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.command == other.command
            && self.config == other.config
            && self.master_seed == other.master_seed
            && self.seeds == other.seeds
            && self.model_hash == other.model_hash
            && self.total_samples == other.total_samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            content_hash_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_bytes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        let rows = || vec![vec!["1".to_string(), "0.5".to_string()]];
        write_metrics_csv(&p1, &["k", "rho"], rows()).unwrap();
        write_metrics_csv(&p2, &["k", "rho"], rows()).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        let text = fs::read_to_string(&p1).unwrap();
        assert!(text.starts_with("# schema_version=1\nk,rho\n"));
    }
}
