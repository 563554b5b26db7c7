//! Deterministic file emission: fixed-precision CSV, stable JSON, digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// 17 significant decimal digits, enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// A file written by a run, listed in the manifest with its content digest.
#[derive(Debug, Clone, Serialize)]
pub struct EmittedFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects emitted files and their digests under one output directory.
#[derive(Debug)]
pub struct OutputSink {
    pub directory: PathBuf,
    pub files: Vec<EmittedFile>,
}

impl OutputSink {
    pub fn new(directory: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(directory.as_ref())?;
        Ok(OutputSink {
            directory: directory.as_ref().to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.directory.join(name);
        fs::write(&path, contents)?;
        self.files.push(EmittedFile {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let body = serde_json::to_string_pretty(value)
            .map_err(|e| crate::error::Error::Config(format!("serialization failed: {e}")))?;
        self.write(name, &body)
    }
}
