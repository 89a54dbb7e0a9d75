//! Run manifests: configuration snapshot, per-task status and output digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::io::write_atomic;
use crate::LabError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub index: u64,
    pub seed: u64,
    pub ok: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path relative to the output directory.
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub tasks: Vec<TaskStatus>,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            // scheduling and location do not change the outputs
            config: config
                .entries()
                .into_iter()
                .filter(|(k, _)| !matches!(*k, "workers" | "out_dir"))
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            tasks: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn failed_tasks(&self) -> usize {
        self.tasks.iter().filter(|t| !t.ok).count()
    }

    /// Writes `bytes` atomically under `dir` and records its digest.
    pub fn add_file(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        write_atomic(&dir.join(name), bytes)?;
        self.files.push(FileDigest { name: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Writes the manifest last, after every output it lists.
    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(&dir.join(MANIFEST_NAME), &json)
    }

    pub fn read(dir: &Path) -> Result<Self, LabError> {
        Ok(serde_json::from_slice(&fs::read(dir.join(MANIFEST_NAME))?)?)
    }

    /// Names of listed files whose size or digest no longer matches.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match fs::read(dir.join(&f.name)) {
                Ok(b) => b.len() as u64 != f.bytes || sha256_hex(&b) != f.sha256,
                Err(_) => true,
            })
            .map(|f| f.name.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_detects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(&RunConfig::default());
        m.add_file(dir.path(), "a.csv", b"x,y\n1,2\n").unwrap();
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        assert!(back.verify(dir.path()).is_empty());
        fs::write(dir.path().join("a.csv"), b"x,y\n1,").unwrap();
        assert_eq!(back.verify(dir.path()), vec!["a.csv".to_string()]);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
