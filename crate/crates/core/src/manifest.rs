//! Run manifests: what was run, with which settings, on which inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL: &str = "gtaxo";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance record. Carries no timestamps or host details so identical
/// runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name; output locations read `<out>`.
    pub command: Vec<String>,
    /// Every setting in effect, defaults included.
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// Fixed choices that shape results.
    pub decisions: Vec<String>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: serde_json::Value) -> Self {
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command,
            config,
            seeds: BTreeMap::new(),
            decisions: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.into(), value);
        self
    }

    pub fn decisions(mut self, items: &[&str]) -> Self {
        self.decisions.extend(items.iter().map(|s| s.to_string()));
        self
    }

    /// Records hashes of a file or of every file under a directory.
    pub fn input(mut self, path: &Path) -> Result<Self> {
        self.inputs.extend(hash_tree(path)?);
        Ok(self)
    }

    /// Records hashes of output files, named relative to `base`.
    pub fn outputs(mut self, base: &Path, files: &[PathBuf]) -> Result<Self> {
        for f in files {
            let rel = f.strip_prefix(base).unwrap_or(f);
            self.outputs.push(FileHash {
                path: rel.to_string_lossy().replace('\\', "/"),
                sha256: sha256_hex(&fs::read(f)?),
            });
        }
        self.outputs.sort();
        Ok(self)
    }

    /// Hashes every file in `dir` except the manifest, then writes the
    /// manifest there.
    pub fn finish_dir(self, dir: &Path) -> Result<()> {
        let mut files = Vec::new();
        collect(dir, &mut files)?;
        files.retain(|f| f.file_name() != Some(MANIFEST_FILE.as_ref()));
        let m = self.outputs(dir, &files)?;
        crate::io::write_json_pretty(&dir.join(MANIFEST_FILE), &m)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hashes of `path` (a file) or all files below it, sorted by path. Paths are
/// reported as `path` joined with the relative file name.
pub fn hash_tree(path: &Path) -> Result<Vec<FileHash>> {
    let mut files = Vec::new();
    collect(path, &mut files)?;
    files.sort();
    files
        .into_iter()
        .map(|f| {
            Ok(FileHash {
                path: f.to_string_lossy().replace('\\', "/"),
                sha256: sha256_hex(&fs::read(&f)?),
            })
        })
        .collect()
}

fn collect(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        for entry in fs::read_dir(path)? {
            collect(&entry?.path(), out)?;
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}
