//! Run manifests: enough metadata to reproduce a run byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: String,
    /// Flag overrides that shaped the run.
    pub config: BTreeMap<String, String>,
    pub out_dir: String,
    pub seed: u64,
    /// SHA-256 of every emitted artifact, keyed by file name.
    pub artifacts: BTreeMap<String, String>,
}

/// Collects artifacts under one output directory and writes the manifest
/// last.
pub struct OutputSink {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutputSink {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.files.insert(name.to_string(), hex(&hasher.finalize()));
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        scenario: &str,
        config: BTreeMap<String, String>,
        seed: u64,
    ) -> io::Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            scenario: scenario.to_string(),
            config,
            out_dir: self.dir.display().to_string(),
            seed,
            artifacts: self.files,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
