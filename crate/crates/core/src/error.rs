use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("symbol is not finite at xi = {xi:?}")]
    SingularSymbol { xi: Vec<f64> },
    #[error("grid too coarse: largest resolvable box index is {kmax}, need at least 2")]
    GridTooCoarse { kmax: i64 },
    #[error("box index {index:?} exceeds the resolvable range {kmax}")]
    BoxOutOfRange { index: Vec<i64>, kmax: i64 },
    #[error("spectrum not resolved: escaping mass fraction {escaping:e} exceeds 1e-8")]
    SpectrumNotResolved { escaping: f64 },
    #[error("STFT lattice not converged: halving the steps changed the norm by {change:.3e}")]
    LatticeNotConverged { change: f64 },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("gamma = {gamma} must lie in (0, {dim})")]
    InvalidGamma { gamma: f64, dim: usize },
    #[error("derived gamma = {gamma} falls outside (0, {dim})")]
    InfeasibleGamma { gamma: f64, dim: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("time meshes do not match")]
    MeshMismatch,
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("Picard iteration diverged after {iterations} iterations (ratios {ratios:?})")]
    PicardDiverged { iterations: usize, ratios: Vec<f64> },
    #[error("numerical instability: {0}")]
    NonFinite(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures produced by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PicardDiverged { .. }
                | Error::NonFinite(_)
                | Error::LatticeNotConverged { .. }
                | Error::SpectrumNotResolved { .. }
        )
    }
}
