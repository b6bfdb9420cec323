//! Deterministic run artifacts: a key-value report plus CSV tables.
//!
//! Every artifact records the config hash; the timestamp is isolated to a
//! single report field so byte comparison of reruns stays viable. Partial
//! outputs are removed when a run fails.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Result, SimError};

/// Key-value run report, written as `key=value` lines in insertion order.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// Tracks files created by one run so they can be removed on failure.
pub struct RunArtifacts {
    dir: PathBuf,
    config_hash: String,
    created: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn create(dir: impl Into<PathBuf>, config_hash: impl Into<String>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RunArtifacts { dir, config_hash: config_hash.into(), created: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    /// Write the run report; `config_hash` first, the timestamp second, then
    /// the entries in order.
    pub fn write_report(&mut self, name: &str, report: &Report) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        writeln!(f, "config_hash={}", self.config_hash)?;
        writeln!(f, "timestamp={}", chrono::Utc::now().to_rfc3339())?;
        for (k, v) in report.entries() {
            writeln!(f, "{k}={v}")?;
        }
        self.created.push(path.clone());
        Ok(path)
    }

    /// Write a CSV table: a `# config_hash=...` comment line, the header
    /// row, then the data rows.
    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# config_hash={}", self.config_hash)?;
        writeln!(f, "{header}")?;
        for row in rows {
            writeln!(f, "{}", row.as_ref())?;
        }
        self.created.push(path.clone());
        Ok(path)
    }

    /// Remove everything this run created (called on failure).
    pub fn remove_created(&mut self) {
        for p in self.created.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

/// SHA-256 hex digest of the canonical serialized config.
pub fn config_hash(serialized: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(serialized.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Comparison helper: report contents with the timestamp line removed.
pub fn strip_timestamp(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.starts_with("timestamp="))
        .collect::<Vec<_>>()
        .join("\n")
}

impl SimError {
    /// Convenience used by the CLI dispatcher.
    pub fn context(self, what: &str) -> SimError {
        match self {
            SimError::Config(msg) => SimError::Config(format!("{what}: {msg}")),
            SimError::Validation(msg) => SimError::Validation(format!("{what}: {msg}")),
            other => other,
        }
    }
}
