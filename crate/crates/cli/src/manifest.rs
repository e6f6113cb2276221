//! Run manifests: what was read, what was written, and how long it took.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileEntry {
    pub fn of(path: &Path) -> Result<Self> {
        let file =
            File::open(path).with_context(|| format!("cannot checksum {}", path.display()))?;
        let mut hasher = Sha256::new();
        let bytes = io::copy(&mut BufReader::new(file), &mut hasher)?;
        Ok(FileEntry {
            path: path.display().to_string(),
            sha256: hex::encode(hasher.finalize()),
            bytes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub started_unix: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub timings: Vec<Timing>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        if !self.inputs.iter().any(|e| Path::new(&e.path) == path) {
            self.inputs.push(FileEntry::of(path)?);
        }
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(FileEntry::of(path)?);
        Ok(())
    }

    pub fn time(&mut self, stage: &str, start: Instant) {
        let seconds = start.elapsed().as_secs_f64();
        log::info!("{stage}: {seconds:.3}s");
        self.timings.push(Timing {
            stage: stage.to_string(),
            seconds,
        });
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut sink =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        serde_json::to_writer_pretty(&mut sink, self)?;
        writeln!(sink)?;
        Ok(())
    }
}
