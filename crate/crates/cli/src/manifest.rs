use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use arsense::io::{read_json, write_json};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the manifest's directory for outputs; as given for inputs.
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to replay a run: the command line, the resolved
/// configuration and hashes of every file read and written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub timings_ms: BTreeMap<String, f64>,
}

pub fn sha256_file(path: &Path) -> arsense::Result<String> {
    let bytes = std::fs::read(path).map_err(|e| arsense::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: &[String], config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> arsense::Result<()> {
        self.inputs.push(FileEntry {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Records the written files and saves the manifest next to them.
    pub fn finish(mut self, dir: &Path, written: &[PathBuf]) -> arsense::Result<PathBuf> {
        for path in written {
            let rel = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
            self.outputs.push(FileEntry {
                path: rel,
                sha256: sha256_file(path)?,
            });
        }
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let path = dir.join(MANIFEST_FILE);
        write_json(&path, &self)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> arsense::Result<Self> {
        read_json(path)
    }
}
