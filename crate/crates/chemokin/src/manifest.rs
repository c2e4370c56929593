use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One engine run inside an invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    /// Canonical config text; feeding it back to the CLI repeats the run.
    pub config: String,
    /// Derived settings (τ, μ̂, time step, grid, step counts, ...).
    pub resolved: BTreeMap<String, Value>,
    /// Outcome figures (residuals, tumbling fraction, ...).
    pub stats: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// Invocation, e.g. `mc-run` or `preset fig3b --scale desk`.
    pub command: String,
    pub created: String,
    pub wall_clock_s: f64,
    pub runs: Vec<RunRecord>,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Input { path: path.to_path_buf(), msg: e.to_string() })
    }

    /// Recomputes every digest against the files in `dir`; returns the
    /// names that are missing or changed.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| match std::fs::read(dir.join(&o.file)) {
                Ok(b) => sha256_hex(&b) != o.sha256,
                Err(_) => true,
            })
            .map(|o| o.file.clone())
            .collect()
    }
}

/// In-memory output file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutFile {
    pub name: String,
    pub body: String,
}

impl OutFile {
    pub fn new(name: impl Into<String>, body: String) -> Self {
        Self { name: name.into(), body }
    }
}

/// Writes `files` and the manifest into a fresh directory under `root`
/// named `<timestamp>-<digest>`. The directory is removed again if any
/// write fails.
pub fn write_run_dir(
    root: &Path,
    command: &str,
    runs: Vec<RunRecord>,
    files: &[OutFile],
    wall_clock_s: f64,
) -> Result<(PathBuf, RunManifest)> {
    let now = chrono::Local::now();
    let mut key = Sha256::new();
    key.update(command.as_bytes());
    for r in &runs {
        key.update(r.config.as_bytes());
    }
    let tag = format!("{}-{}", now.format("%Y%m%dT%H%M%S"), &hex::encode(key.finalize())[..12]);
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut dir = root.join(&tag);
    let mut n = 1;
    while dir.exists() {
        dir = root.join(format!("{tag}-{n}"));
        n += 1;
    }
    std::fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;

    let write_all = || -> Result<RunManifest> {
        let mut outputs = Vec::with_capacity(files.len());
        for f in files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.body).map_err(|e| Error::io(&path, e))?;
            outputs.push(OutputDigest {
                file: f.name.clone(),
                sha256: sha256_hex(f.body.as_bytes()),
                bytes: f.body.len() as u64,
            });
        }
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created: now.to_rfc3339(),
            wall_clock_s,
            runs,
            outputs,
        };
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    };
    match write_all() {
        Ok(m) => Ok((dir, m)),
        Err(e) => {
            let _ = std::fs::remove_dir_all(&dir);
            Err(e)
        }
    }
}
