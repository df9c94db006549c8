pub mod evolve;
pub mod exponents;
pub mod norm;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, Loaded, RunConfig};
use crate::error::CliError;

pub const DEFAULT_OUTPUT_DIR: &str = "modspace-out";

/// Config plus the command-line overrides shared by the file-driven subcommands.
pub struct Invocation {
    pub config: RunConfig,
    pub base: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Invocation {
    pub fn new(loaded: Option<Loaded>, seed: Option<u64>, out: Option<PathBuf>, format: Option<Format>) -> Self {
        let (config, base) = match loaded {
            Some(l) => (l.config, l.base),
            None => (RunConfig::default(), PathBuf::from(".")),
        };
        Self { config, base, seed, out, format }
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed.or(self.config.seed)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.config.format)
    }

    pub fn output_dir(&self) -> PathBuf {
        match (&self.out, &self.config.output_dir) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) if p.is_relative() => self.base.join(p),
            (None, Some(p)) => p.clone(),
            (None, None) => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    pub fn base(&self) -> &Path {
        &self.base
    }
}

/// Canonical JSON of whatever determines an artifact's content.
pub fn effective<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("configuration serializes")
}

pub fn missing_section(name: &str) -> CliError {
    CliError::Validation(format!("invalid configuration at `{name}`: section is required for this subcommand"))
}
