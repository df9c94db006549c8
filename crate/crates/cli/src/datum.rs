use std::path::Path;

use modspace::field::snapshot;
use modspace::verify::{CorpusGenerator, FieldCorpus};
use modspace::{GridSpec, SampledField};
use modspace::Complex64;

use crate::config::DatumSpec;
use crate::error::CliError;

/// Width of the edge shell, as a fraction of the box, watched for wrap-around mass.
pub const BOUNDARY_SHELL: f64 = 1.0 / 16.0;
pub const BOUNDARY_WARN: f64 = 1e-8;

fn invalid(path: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid configuration at `{path}`: {message}"))
}

/// Grid of a snapshot datum, if any.
pub fn snapshot_grid(spec: &DatumSpec, base: &Path, path: &str) -> Result<Option<GridSpec>, CliError> {
    match spec {
        DatumSpec::Snapshot { path: file } => {
            let f = snapshot::read(&base.join(file)).map_err(|e| invalid(path, e))?;
            Ok(Some(*f.grid()))
        }
        _ => Ok(None),
    }
}

/// Builds the field described by `spec`; `path` names the config key in errors.
pub fn build(spec: &DatumSpec, grid: &GridSpec, seed: u64, base: &Path, path: &str) -> Result<SampledField, CliError> {
    let d = grid.dim();
    let field = match spec {
        DatumSpec::Zero => SampledField::zeros(*grid),
        DatumSpec::Gaussian { amplitude, width, center, modulation } => {
            for (name, v) in [("center", center), ("modulation", modulation)] {
                if !(v.is_empty() || v.len() == d) {
                    return Err(invalid(&format!("{path}.{name}"), format!("needs {d} entries, got {}", v.len())));
                }
            }
            if !(*width > 0.0 && width.is_finite()) || !amplitude.is_finite() {
                return Err(invalid(path, "width must be positive and amplitude finite"));
            }
            let at = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
            let pi = std::f64::consts::PI;
            SampledField::from_fn(*grid, |x| {
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    r2 += (xi - at(center, i)).powi(2);
                    phase += 2.0 * pi * at(modulation, i) * xi;
                }
                Complex64::from_polar(amplitude * (-pi * r2 / (width * width)).exp(), phase)
            })
            .map_err(|e| invalid(path, e))?
        }
        DatumSpec::RandomBandlimited { band } => {
            let corpus = FieldCorpus::new(CorpusGenerator::RandomBandlimited { seed, band: *band }, 1);
            corpus.validate(grid).map_err(|e| invalid(path, e))?;
            corpus.member(grid, 0).map_err(CliError::from)?
        }
        DatumSpec::Snapshot { path: file } => {
            let f = snapshot::read(&base.join(file)).map_err(|e| invalid(path, e))?;
            if f.grid() != grid {
                return Err(invalid(path, format!("snapshot grid {:?} differs from the run grid {grid:?}", f.grid())));
            }
            f
        }
    };
    let edge = field.boundary_fraction(BOUNDARY_SHELL);
    if edge > BOUNDARY_WARN {
        eprintln!("warning: `{path}` carries {edge:.3e} of its mass near the box edge; periodization may distort results");
    }
    Ok(field)
}
