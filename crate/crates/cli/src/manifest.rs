//! Output workspace: files written by a campaign are registered and listed
//! with content hashes in a final `manifest.json`. No timestamps, so
//! identical runs produce byte-identical trees.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    path: String,
    sha256: String,
    bytes: u64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    campaign: String,
    seed: u64,
    all_passed: bool,
    assertions: &'a [Assertion],
    files: Vec<ManifestFile>,
}

pub struct Workspace {
    out: PathBuf,
    files: Vec<String>,
}

impl Workspace {
    pub fn create(out: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.out.join(rel);
        std::fs::write(&path, bytes)
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(rel.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(rel, &bytes)
    }

    /// Hash every registered file and write `manifest.json`. Returns whether
    /// all assertions passed.
    pub fn finalize(
        mut self,
        campaign: &str,
        seed: u64,
        assertions: &[Assertion],
    ) -> anyhow::Result<bool> {
        self.files.sort();
        let mut files = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let path = self.out.join(rel);
            let bytes = std::fs::read(&path)
                .with_context(|| format!("cannot hash {}", path.display()))?;
            files.push(ManifestFile {
                path: rel.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
                bytes: bytes.len() as u64,
            });
        }
        let all_passed = assertions.iter().all(|a| a.passed);
        let manifest = Manifest {
            campaign: campaign.to_string(),
            seed,
            all_passed,
            assertions,
            files,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.out.join("manifest.json"), bytes)?;
        Ok(all_passed)
    }
}
