//! Independent runs over a directory of config files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::parse_config;
use crate::error::{Error, Result};
use crate::manifest::OutFile;
use crate::run::{execute, Executed};

pub const CONFIG_EXT: &str = "conf";

#[derive(Debug)]
pub struct SweepEntry {
    pub name: String,
    pub result: Result<Executed>,
}

/// `*.conf` files in `dir`, sorted by name.
pub fn config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == CONFIG_EXT) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn run_one(path: &Path) -> Result<Executed> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Input { path: path.to_path_buf(), msg },
        other => other,
    })?;
    let stem = path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    execute(&cfg, &stem)
}

/// Runs every config in `dir` on a pool of `width` workers. A failing
/// config does not stop the others; results come back in file order.
pub fn sweep(dir: &Path, width: usize) -> Result<Vec<SweepEntry>> {
    let files = config_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(width.max(1))
        .build()
        .expect("failed to start worker threads");
    Ok(pool.install(|| {
        files
            .par_iter()
            .map(|p| SweepEntry {
                name: p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                result: run_one(p),
            })
            .collect()
    }))
}

/// `config,status,exit_code,message` table for a finished sweep.
pub fn index(entries: &[SweepEntry]) -> OutFile {
    let mut s = String::from("config,status,exit_code,message\n");
    for e in entries {
        match &e.result {
            Ok(_) => {
                let _ = writeln!(s, "{},ok,0,", e.name);
            }
            Err(err) => {
                let msg = err.to_string().replace([',', '\n'], ";");
                let _ = writeln!(s, "{},failed,{},{msg}", e.name, err.exit_code());
            }
        }
    }
    OutFile::new("index.csv", s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = "engine=mc epsilon=0.1 tau=10 nu=0.3 delta=1.25 chi=0.7 scale=smoke";

    fn bodies(entries: &[SweepEntry]) -> Vec<Vec<String>> {
        entries
            .iter()
            .map(|e| e.result.as_ref().unwrap().files.iter().map(|f| f.body.clone()).collect())
            .collect()
    }

    #[test]
    fn parallel_matches_sequential() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.conf"), format!("{SMOKE} seed=1")).unwrap();
        std::fs::write(dir.path().join("b.conf"), "engine=exks epsilon=0.1 scaling=large beta=1 nu=0.3 delta=1.25 chi=0.7 scale=smoke").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let seq = sweep(dir.path(), 1).unwrap();
        let par = sweep(dir.path(), 2).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(bodies(&seq), bodies(&par));
    }

    #[test]
    fn failures_are_isolated() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("good.conf"), SMOKE).unwrap();
        std::fs::write(dir.path().join("bad.conf"), format!("{SMOKE} bogus=1")).unwrap();
        let out = sweep(dir.path(), 2).unwrap();
        assert!(out[0].result.is_err());
        assert!(out[1].result.is_ok());
        let idx = index(&out).body;
        assert!(idx.contains("bad.conf,failed,2,"), "{idx}");
        assert!(idx.contains("good.conf,ok,0,"));
    }

    #[test]
    fn empty_dir() {
        let dir = tempfile::tempdir().unwrap();
        let out = sweep(dir.path(), 2).unwrap();
        assert!(out.is_empty());
        assert_eq!(index(&out).body, "config,status,exit_code,message\n");
    }
}
