use modspace::field::snapshot;
use modspace::solver::{scattering_profile, solve, ConvergenceReport, ScatteringReport};
use modspace::{EquationKind, EquationSpec, HartreeKernel, NormSpec, SampledField, Termination};
use serde::Serialize;
use serde_json::json;

use super::{effective, missing_section, Invocation};
use crate::artifacts::{Meta, Sink};
use crate::config::{DatumSpec, EquationName, EvolveSection, KernelBlock};
use crate::datum;
use crate::error::CliError;

#[derive(Serialize)]
struct EvolveReport<'a> {
    meta: &'a Meta,
    config: &'a serde_json::Value,
    termination: Termination,
    steps: usize,
    dt: f64,
    final_time: f64,
    tracked_norms: Vec<String>,
    final_norms: Vec<f64>,
    convergence: Option<ConvergenceReport>,
    scattering: Option<ScatteringReport>,
    snapshots: Vec<String>,
    error: Option<String>,
}

fn invalid(path: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid configuration at `{path}`: {message}"))
}

fn equation_kind(section: &EvolveSection) -> Result<EquationKind, CliError> {
    match (section.equation, section.alpha) {
        (EquationName::Fhnls, Some(alpha)) => Ok(EquationKind::Fhnls { alpha }),
        (EquationName::Fhnls, None) => Err(invalid("evolve.alpha", "fhnls needs alpha")),
        (_, Some(_)) => Err(invalid("evolve.alpha", "alpha applies to fhnls only")),
        (EquationName::Hnlkg, None) => Ok(EquationKind::Hnlkg),
        (EquationName::Hnlw, None) => Ok(EquationKind::Hnlw),
    }
}

fn kernel(block: &KernelBlock, grid: &modspace::GridSpec, inv: &Invocation) -> Result<HartreeKernel, CliError> {
    let at = |e| CliError::at("evolve.kernel", e);
    match block {
        KernelBlock::Riesz { lambda, gamma, power_k, zero_mode, dealias } => {
            Ok(HartreeKernel::riesz(grid, *lambda, *gamma, *power_k, *zero_mode).map_err(at)?.with_dealias(*dealias))
        }
        KernelBlock::Sampled { sample_file, power_k, dealias } => {
            let v = snapshot::read(&inv.base().join(sample_file)).map_err(at)?;
            if v.grid() != grid {
                return Err(invalid("evolve.kernel.sample_file", "potential grid differs from the run grid"));
            }
            Ok(HartreeKernel::sampled(&v, *power_k).map_err(at)?.with_dealias(*dealias))
        }
    }
}

fn norm_label(s: &NormSpec) -> String {
    format!(
        "M({};{};{})",
        modspace::serde_ext::fmt_exponent(s.p),
        modspace::serde_ext::fmt_exponent(s.q),
        s.s
    )
}

pub fn run(inv: &Invocation) -> Result<serde_json::Value, CliError> {
    let section = inv.config.evolve.as_ref().ok_or_else(|| missing_section("evolve"))?;
    // Validate everything before any stepping.
    section.solve.validate().map_err(|e| CliError::at("evolve", e))?;
    let kind = equation_kind(section)?;
    if section.scattering && kind == EquationKind::Hnlw {
        return Err(invalid("evolve.scattering", "no scattering profile is defined for the wave equation"));
    }
    if !kind.is_second_order() && section.velocity.is_some() {
        return Err(invalid("evolve.velocity", "first-order equations take no initial velocity"));
    }
    let grid = match (inv.config.grid, datum::snapshot_grid(&section.datum, inv.base(), "evolve.datum")?) {
        (Some(g), _) | (None, Some(g)) => g,
        (None, None) => return Err(missing_section("grid")),
    };
    let seed = inv.seed().unwrap_or(0);
    let kernel = kernel(&section.kernel, &grid, inv)?;
    let u0 = datum::build(&section.datum, &grid, seed, inv.base(), "evolve.datum")?;
    let u1 = if kind.is_second_order() {
        let spec = section.velocity.clone().unwrap_or(DatumSpec::Zero);
        Some(datum::build(&spec, &grid, seed.wrapping_add(1), inv.base(), "evolve.velocity")?)
    } else {
        None
    };
    let eq = EquationSpec::new(kind, kernel, u0, u1, section.allow_any_alpha).map_err(|e| CliError::at("evolve", e))?;

    let config = effective(&json!({
        "command": "evolve",
        "grid": grid,
        "evolve": section,
        "seed": seed,
    }));
    let meta = Meta::new("evolve", &config, Some(seed));
    let tracked = if section.solve.tracked_norms.is_empty() {
        vec![NormSpec { p: 2.0, q: 2.0, s: 0.0 }]
    } else {
        section.solve.tracked_norms.clone()
    };
    let labels: Vec<String> = tracked.iter().map(norm_label).collect();
    let (steps, dt) = section.solve.mesh();
    let mut sink = Sink::new(&inv.output_dir());

    let traj = match solve(&eq, &section.solve) {
        Ok(t) => t,
        Err(e @ modspace::Error::PicardDiverged { .. }) => {
            let report = EvolveReport {
                meta: &meta,
                config: &config,
                termination: Termination::PicardDiverged,
                steps,
                dt,
                final_time: 0.0,
                tracked_norms: labels,
                final_norms: vec![],
                convergence: None,
                scattering: None,
                snapshots: vec![],
                error: Some(e.to_string()),
            };
            sink.json("report.json", &report)?;
            sink.finish(&meta, "picard_diverged")?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };

    let mut body = format!("t,{},mass,energy,escaping\n", labels.join(","));
    for d in &traj.diagnostics {
        let norms: Vec<String> = d.norms.iter().map(|v| format!("{v:.17e}")).collect();
        body.push_str(&format!(
            "{:.17e},{},{:.17e},{:.17e},{:.6e}\n",
            d.t,
            norms.join(","),
            d.mass,
            d.energy,
            d.escaping
        ));
    }
    sink.csv("diagnostics.csv", &meta, &body)?;

    let mut snapshots = Vec::new();
    if section.snapshots {
        let mut save = |name: String, f: &SampledField| -> Result<(), CliError> {
            sink.bytes(&format!("snapshots/{name}"), &snapshot::encode(f))?;
            snapshots.push(name);
            Ok(())
        };
        for (j, u) in traj.u.iter().enumerate() {
            save(format!("u_{j:05}.mspf"), u)?;
        }
        for (j, ut) in traj.ut.iter().flatten().enumerate() {
            save(format!("ut_{j:05}.mspf"), ut)?;
        }
    }

    let scattering = if section.scattering && traj.termination == Termination::Completed {
        Some(scattering_profile(&traj, &eq, &section.solve.tracked_norms)?)
    } else {
        None
    };
    let last = traj.diagnostics.last();
    let report = EvolveReport {
        meta: &meta,
        config: &config,
        termination: traj.termination.clone(),
        steps,
        dt,
        final_time: *traj.times.last().unwrap_or(&0.0),
        tracked_norms: labels,
        final_norms: last.map(|d| d.norms.clone()).unwrap_or_default(),
        convergence: traj.convergence.clone(),
        scattering,
        snapshots,
        error: None,
    };
    let path = sink.json("report.json", &report)?;
    let outcome = match traj.termination {
        Termination::Completed => "completed",
        Termination::BlowupDetected { .. } => "blowup_detected",
        Termination::PicardDiverged => "picard_diverged",
    };
    sink.finish(&meta, outcome)?;
    if traj.termination == Termination::PicardDiverged {
        return Err(CliError::Numerical("Picard iteration diverged".into()));
    }
    Ok(json!({ "report": path, "termination": report.termination, "final_time": report.final_time }))
}
