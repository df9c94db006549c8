//! Self-describing outputs: every artifact carries the config hash, the
//! seed and the conventions it was computed under.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use modspace::io::write_atomic;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const WEIGHT_CONVENTION: &str = "<k>^s = (1 + |k|^2)^(s/2) on box index k";

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: String,
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub conventions: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(command: &str, effective: &serde_json::Value, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_vec(effective).expect("json values serialize");
        let hash = hex_digest(&canonical);
        let conventions = [
            ("fourier", modspace::field::FOURIER_CONVENTION),
            ("phase", modspace::propagators::PHASE_CONVENTION),
            ("weight", WEIGHT_CONVENTION),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Self {
            tool: format!("modspace {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            config_sha256: hash,
            seed,
            conventions,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.conventions.insert(key.into(), value.to_string());
        self
    }

    /// `# key=value` lines for CSV files.
    pub fn csv_header(&self) -> String {
        let mut out = format!("# tool={}\n# command={}\n# config_sha256={}\n", self.tool, self.command, self.config_sha256);
        out.push_str(&format!("# seed={}\n", self.seed.map_or("none".into(), |s| s.to_string())));
        for (k, v) in &self.conventions {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory writer with a timestamped sidecar log.
pub struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
    started: u64,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Sink {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), written: Vec::new(), started: unix_now() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        write_atomic(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, meta: &Meta, body: &str) -> Result<PathBuf, CliError> {
        let text = format!("{}{}", meta.csv_header(), body);
        self.bytes(name, text.as_bytes())
    }

    /// Writes `run.log` with wall-clock times, kept apart from the artifacts.
    pub fn finish(mut self, meta: &Meta, outcome: &str) -> Result<Vec<PathBuf>, CliError> {
        let mut log = format!(
            "started_unix={}\nfinished_unix={}\ncommand={}\nconfig_sha256={}\noutcome={outcome}\n",
            self.started,
            unix_now(),
            meta.command,
            meta.config_sha256
        );
        for p in &self.written {
            log.push_str(&format!("artifact={}\n", p.display()));
        }
        let path = self.path("run.log");
        write_atomic(&path, log.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(self.written)
    }
}
