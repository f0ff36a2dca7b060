//! Run directories and the manifest written at the end of every command.

use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const OUTPUT_DIR_ENV: &str = "ASYMDETECT_OUTPUT_DIR";
pub const RUN_MANIFEST: &str = "run.json";

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn hash_file(path: &Path, label: String) -> Result<FileHash> {
    let mut file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut hasher = Sha256::new();
    let bytes = io::copy(&mut file, &mut hasher).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileHash {
        path: label,
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Record of one invocation: enough to rerun it and to check its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub inputs: Vec<FileHash>,
    /// Output files, relative to the run directory.
    pub artifacts: Vec<FileHash>,
    pub started_unix: u64,
    pub runtime_seconds: f64,
}

/// An in-progress run writing into `dir`.
pub struct Run {
    pub dir: PathBuf,
    command: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<FileHash>,
    artifacts: Vec<String>,
    started_unix: u64,
    clock: Instant,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Run {
    /// Starts a run in `out`, or in a fresh `<base>/<command>-<unix time>`
    /// directory where `<base>` comes from the environment or defaults to `runs`.
    pub fn start<C: Serialize>(command: &'static str, out: Option<&Path>, config: &C, seed: Option<u64>) -> Result<Self> {
        let started_unix = unix_now();
        let dir = match out {
            Some(dir) => dir.to_path_buf(),
            None => {
                let base = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| "runs".into());
                let mut dir = base.join(format!("{command}-{started_unix}"));
                let mut suffix = 1;
                while dir.exists() {
                    dir = base.join(format!("{command}-{started_unix}-{suffix}"));
                    suffix += 1;
                }
                dir
            }
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir,
            command,
            config: serde_json::to_value(config)?,
            seed,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            started_unix,
            clock: Instant::now(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let hash = hash_file(path, path.display().to_string())?;
        self.inputs.push(hash);
        Ok(())
    }

    /// Path of an output file, registered for hashing in the manifest.
    pub fn artifact(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let path = self.dir.join(&name);
        self.artifacts.push(name);
        path
    }

    pub fn finish(self) -> Result<PathBuf> {
        let artifacts = self
            .artifacts
            .iter()
            .map(|name| hash_file(&self.dir.join(name), name.clone()))
            .collect::<Result<_>>()?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            argv: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            threads: rayon::current_num_threads(),
            inputs: self.inputs,
            artifacts,
            started_unix: self.started_unix,
            runtime_seconds: self.clock.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(RUN_MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(self.dir)
    }
}
