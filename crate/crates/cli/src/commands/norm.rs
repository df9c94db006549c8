use modspace::modnorm::{build_windows, stft_norm, Convention, NormRecord, StftSpec};
use modspace::modulation_norm;
use serde::Serialize;
use serde_json::json;

use super::{effective, missing_section, Invocation};
use crate::artifacts::{Meta, Sink};
use crate::config::{DatumSpec, Format};
use crate::datum;
use crate::error::CliError;

#[derive(Serialize)]
struct NormReport<'a> {
    meta: &'a Meta,
    config: &'a serde_json::Value,
    records: &'a [NormRecord],
}

fn field_id(spec: &DatumSpec) -> String {
    match spec {
        DatumSpec::Zero => "zero".into(),
        DatumSpec::Gaussian { .. } => "gaussian".into(),
        DatumSpec::RandomBandlimited { .. } => "random_bandlimited".into(),
        DatumSpec::Snapshot { path } => path.display().to_string(),
    }
}

pub fn run(inv: &Invocation) -> Result<serde_json::Value, CliError> {
    let section = inv.config.norm.as_ref().ok_or_else(|| missing_section("norm"))?;
    if section.specs.is_empty() {
        return Err(CliError::Validation("invalid configuration at `norm.specs`: list is empty".into()));
    }
    for (i, s) in section.specs.iter().enumerate() {
        s.validate().map_err(|e| CliError::at(&format!("norm.specs[{i}]"), e))?;
    }
    let grid = match (inv.config.grid, datum::snapshot_grid(&section.datum, inv.base(), "norm.datum")?) {
        (Some(g), _) | (None, Some(g)) => g,
        (None, None) => return Err(missing_section("grid")),
    };
    let stft = match (section.convention, section.stft) {
        (Convention::Stft, None) => {
            return Err(CliError::Validation(
                "invalid configuration at `norm.stft`: the stft convention needs lattice steps a and b".into(),
            ))
        }
        (Convention::Stft, Some(s)) => {
            Some(StftSpec::gaussian(&grid, s.a, s.b).map_err(|e| CliError::at("norm.stft", e))?)
        }
        (Convention::Decomposition, _) => None,
    };
    let ws = build_windows(&grid, section.profile).map_err(|e| CliError::at("grid", e))?;
    let seed = inv.seed().unwrap_or(0);
    let field = datum::build(&section.datum, &grid, seed, inv.base(), "norm.datum")?;

    let escaping = ws.escaping_mass(&field)?;
    let id = field_id(&section.datum);
    let records = section
        .specs
        .iter()
        .map(|spec| {
            let value = match &stft {
                Some(s) => stft_norm(&field, spec, s)?,
                None => modulation_norm(&field, spec, &ws)?,
            };
            Ok(NormRecord {
                field_id: id.clone(),
                spec: *spec,
                convention: section.convention,
                value,
                escaping_mass: escaping,
            })
        })
        .collect::<Result<Vec<_>, modspace::Error>>()?;

    let config = effective(&json!({
        "command": "norm",
        "grid": grid,
        "norm": section,
        "seed": seed,
    }));
    let meta = Meta::new("norm", &config, Some(seed))
        .with("window_profile", effective(&section.profile).as_str().unwrap_or_default())
        .with("kmax", ws.kmax());
    let mut sink = Sink::new(&inv.output_dir());
    let artifact = match inv.format() {
        Format::Csv => {
            let mut body = format!("{}\n", NormRecord::CSV_HEADER);
            for r in &records {
                body.push_str(&r.csv_row());
                body.push('\n');
            }
            sink.csv("norms.csv", &meta, &body)?
        }
        Format::Json => sink.json("norms.json", &NormReport { meta: &meta, config: &config, records: &records })?,
    };
    sink.finish(&meta, "ok")?;
    Ok(json!({ "artifact": artifact, "records": records }))
}
