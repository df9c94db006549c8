//! Run configuration: a TOML document with one optional section per
//! subcommand. Every key is checked; unknown keys are errors.

use std::path::{Path, PathBuf};

use modspace::modnorm::Convention;
use modspace::solver::SolveConfig;
use modspace::{GridSpec, NormSpec, TransitionProfile, ZeroModePolicy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub grid: Option<GridSpec>,
    pub norm: Option<NormSection>,
    pub evolve: Option<EvolveSection>,
    pub verify: Option<VerifySection>,
}

/// Initial data or a field to be measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    Zero,
    /// `a·exp(−π|x − c|²/w²)·e^{2πi m·x}`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        modulation: Vec<f64>,
    },
    /// Random spectrum on `|ξ|∞ ≤ band`, drawn from the run seed.
    RandomBandlimited { band: f64 },
    /// Field stored in a snapshot file, relative to the config file.
    Snapshot { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub datum: DatumSpec,
    pub specs: Vec<NormSpec>,
    #[serde(default = "decomposition")]
    pub convention: Convention,
    #[serde(default)]
    pub profile: TransitionProfile,
    pub stft: Option<StftSection>,
}

fn decomposition() -> Convention {
    Convention::Decomposition
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftSection {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationName {
    Hnlkg,
    Hnlw,
    Fhnls,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelBlock {
    /// `λ|x|^{−γ}`.
    Riesz {
        lambda: f64,
        gamma: f64,
        #[serde(default = "one_u32")]
        power_k: u32,
        #[serde(default)]
        zero_mode: ZeroModePolicy,
        #[serde(default)]
        dealias: bool,
    },
    /// Real potential read from a snapshot file.
    Sampled {
        sample_file: PathBuf,
        #[serde(default = "one_u32")]
        power_k: u32,
        #[serde(default)]
        dealias: bool,
    },
}

fn one_u32() -> u32 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub equation: EquationName,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub allow_any_alpha: bool,
    pub kernel: KernelBlock,
    pub datum: DatumSpec,
    /// Initial velocity for second-order equations; zero when absent.
    pub velocity: Option<DatumSpec>,
    pub solve: SolveConfig,
    #[serde(default)]
    pub scattering: bool,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub estimate: Option<String>,
    pub grid: Option<GridSpec>,
    pub corpus: Option<serde_json::Value>,
    /// Overrides for the estimate's exponents and parameters.
    pub params: Option<serde_json::Map<String, serde_json::Value>>,
    pub train_fraction: Option<f64>,
    pub check_resolution: Option<bool>,
}

/// Parsed config and the directory its relative paths resolve against.
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Validation(format!("invalid configuration at `{path}`: {}", inner.message()))
    })
}
