//! On-disk datasets of epidemic instances.
//!
//! A dataset directory holds two files:
//!
//! * `instances.jsonl`: one [`InstanceRecord`] per line, in instance order.
//!   Integers are decimal; `edges` is a flat list `[u0, v0, u1, v1, ...]`
//!   with `u < v` in ascending order; `infected` and `observed` are
//!   ascending.
//! * `manifest.json`: the [`DatasetConfig`] plus record count, byte size and
//!   SHA-256 of `instances.jsonl`.
//!
//! Instance `i` is drawn from the sub-seed `derive_seed(master, "instance", i)`,
//! so instances never share random streams.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::epidemic::{generate_instance, EpidemicInstance, InstanceSpec, NetworkModel};
use crate::graph::Graph;
use crate::rng::derive_seed;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const INSTANCES_FILE: &str = "instances.jsonl";

/// Instances generated and written per parallel round.
const GENERATION_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(flatten)]
    pub spec: InstanceSpec,
    pub instance_count: usize,
    pub master_seed: u64,
}

impl DatasetConfig {
    pub fn new(model: NetworkModel, n: usize, instance_count: usize, theta: f64, master_seed: u64) -> Self {
        DatasetConfig {
            spec: InstanceSpec::new(model, n, theta),
            instance_count,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instance_count == 0 {
            return Err(Error::invalid("a dataset needs at least one instance"));
        }
        self.spec.validate()
    }

    pub fn instance_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, "instance", index as u64)
    }
}

/// One line of `instances.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema_version: u32,
    pub index: usize,
    pub seed: u64,
    pub spec: InstanceSpec,
    pub edges: Vec<usize>,
    pub source: usize,
    pub beta: f64,
    pub t_h: u32,
    pub infected: Vec<usize>,
    pub observed: Vec<usize>,
}

impl InstanceRecord {
    pub fn from_instance(inst: &EpidemicInstance, spec: &InstanceSpec, index: usize, seed: u64) -> Self {
        InstanceRecord {
            schema_version: SCHEMA_VERSION,
            index,
            seed,
            spec: spec.clone(),
            edges: inst.graph.edges().flat_map(|(u, v)| [u, v]).collect(),
            source: inst.source,
            beta: inst.beta,
            t_h: inst.t_h,
            infected: inst.infected.clone(),
            observed: inst.observed.clone(),
        }
    }

    /// Rebuilds the instance and checks every instance invariant.
    pub fn to_instance(&self) -> Result<EpidemicInstance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if !self.edges.len().is_multiple_of(2) {
            return Err(Error::Format("edge list has odd length".into()));
        }
        let pairs: Vec<(usize, usize)> = self.edges.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let inst = EpidemicInstance {
            graph: Graph::from_edges(self.spec.n, &pairs)?,
            source: self.source,
            beta: self.beta,
            theta: self.spec.theta,
            t_h: self.t_h,
            infected: self.infected.clone(),
            observed: self.observed.clone(),
        };
        inst.validate(self.spec.stop_fraction)?;
        Ok(inst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub records: usize,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config: DatasetConfig,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: manifest.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(manifest)
    }
}

/// Generates `cfg.instance_count` instances into `out_dir` (created if
/// missing) and writes the manifest. Instances are built in parallel and
/// written in index order, so the bytes do not depend on the thread count.
pub fn generate_dataset(cfg: &DatasetConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(INSTANCES_FILE);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = HashingWriter::new(BufWriter::new(file));

    let indices: Vec<usize> = (0..cfg.instance_count).collect();
    for chunk in indices.chunks(GENERATION_CHUNK) {
        let lines: Vec<String> = chunk
            .par_iter()
            .map(|&i| {
                let seed = cfg.instance_seed(i);
                let inst = generate_instance(&cfg.spec, seed)?;
                let record = InstanceRecord::from_instance(&inst, &cfg.spec, i, seed);
                serde_json::to_string(&record).map_err(|e| Error::Format(e.to_string()))
            })
            .collect::<Result<_>>()?;
        for line in lines {
            out.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
            out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
    }
    let (sha256, bytes) = out.finish().map_err(|e| Error::io(&path, e))?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        files: vec![FileEntry {
            path: INSTANCES_FILE.to_string(),
            records: cfg.instance_count,
            bytes,
            sha256,
        }],
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&manifest_path, text + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> HashingWriter<W> {
    fn new(inner: W) -> Self {
        HashingWriter {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        }
    }

    fn finish(mut self) -> std::io::Result<(String, u64)> {
        self.inner.flush()?;
        Ok((hex::encode(self.hasher.finalize()), self.bytes))
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let written = self.inner.write(buf)?;
        self.hasher.update(&buf[..written]);
        self.bytes += written as u64;
        Ok(written)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Streaming reader over instance records. Holds one line at a time.
///
/// When built from a manifest it also checks, at end of input, that the
/// record count and SHA-256 match.
pub struct InstanceReader<R> {
    reader: R,
    path: PathBuf,
    line: usize,
    buf: String,
    hasher: Sha256,
    expected: Option<FileEntry>,
    done: bool,
}

impl<R: BufRead> InstanceReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        InstanceReader {
            reader,
            path: path.into(),
            line: 0,
            buf: String::new(),
            hasher: Sha256::new(),
            expected: None,
            done: false,
        }
    }

    fn parse_error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next_record(&mut self) -> Result<Option<EpidemicInstance>> {
        self.buf.clear();
        let read = self
            .reader
            .read_line(&mut self.buf)
            .map_err(|e| Error::io(&self.path, e))?;
        if read == 0 {
            self.finish()?;
            return Ok(None);
        }
        self.line += 1;
        self.hasher.update(self.buf.as_bytes());
        if !self.buf.ends_with('\n') {
            return Err(self.parse_error("truncated record (missing newline)"));
        }
        let record: InstanceRecord =
            serde_json::from_str(self.buf.trim_end()).map_err(|e| self.parse_error(e.to_string()))?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: record.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        record.to_instance().map_err(|e| self.parse_error(e.to_string())).map(Some)
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(expected) = self.expected.take() {
            if self.line != expected.records {
                return Err(self.parse_error(format!(
                    "found {} records, manifest lists {}",
                    self.line, expected.records
                )));
            }
            let digest = hex::encode(std::mem::take(&mut self.hasher).finalize());
            if digest != expected.sha256 {
                return Err(self.parse_error("content hash differs from the manifest"));
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for InstanceReader<R> {
    type Item = Result<EpidemicInstance>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(inst)) => Some(Ok(inst)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Opens a dataset directory for streaming.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, InstanceReader<BufReader<File>>)> {
    let manifest = Manifest::load(dir)?;
    let entry = manifest
        .files
        .first()
        .cloned()
        .ok_or_else(|| Error::Format("manifest lists no instance file".into()))?;
    let path = dir.join(&entry.path);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut reader = InstanceReader::new(BufReader::new(file), path);
    reader.expected = Some(entry);
    Ok((manifest, reader))
}
