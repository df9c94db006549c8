use modspace::exponents::{admissibility, embedding_check, region_scan, smoothness, EmbeddingQuery, RegionRow};
use modspace::verify::embedding_witness_search;
use modspace::{Equation, Exponent, Rational, ThirdConditionMode};
use serde_json::{json, Value};

use super::effective;
use crate::artifacts::{Meta, Sink};
use crate::config::Format;
use crate::error::CliError;

/// Integers as JSON integers, other rationals as floats, `inf` as a string.
fn number(e: Exponent) -> Value {
    match e.value() {
        None => json!("inf"),
        Some(v) if v.is_integer() => json!(*v.numer() as i64),
        Some(_) => json!(e.to_f64()),
    }
}

fn exact(r: &Rational) -> String {
    r.to_string()
}

pub struct AdmissibleArgs {
    pub equation: Equation,
    pub d: u32,
    pub p: Exponent,
    pub r: Option<Exponent>,
    pub mode: ThirdConditionMode,
    pub scan: Option<ScanArgs>,
}

pub struct ScanArgs {
    pub p_max: Exponent,
    pub p_steps: u32,
    pub r_values: Vec<Exponent>,
    pub format: Format,
    pub out: std::path::PathBuf,
}

pub fn admissible(args: &AdmissibleArgs) -> Result<Value, CliError> {
    if let Some(scan) = &args.scan {
        return admissible_scan(args, scan);
    }
    let r = args.r.ok_or_else(|| CliError::Validation("--r is required unless --scan is given".into()))?;
    let rep = admissibility(args.equation, args.d, args.p, r, args.mode)?;
    let w = rep.witness.as_ref();
    Ok(json!({
        "equation": rep.equation,
        "d": rep.d,
        "p": rep.p,
        "r": rep.r,
        "mode": rep.mode,
        "feasible": rep.feasible,
        "beta": w.map(|w| number(w.beta)),
        "beta_exact": w.map(|w| w.beta),
        "theta": w.map(|w| exact(&w.theta)),
        "case": w.map(|w| w.case),
        "failures": rep.failures,
    }))
}

fn admissible_scan(args: &AdmissibleArgs, scan: &ScanArgs) -> Result<Value, CliError> {
    let p_max = scan
        .p_max
        .value()
        .ok_or_else(|| CliError::Validation("--p-max must be finite".into()))?;
    if p_max <= Rational::from_integer(2) || scan.p_steps == 0 || scan.r_values.is_empty() {
        return Err(CliError::Validation("scan needs --p-max > 2, --p-steps >= 1 and some --r-values".into()));
    }
    let rows = region_scan(args.equation, args.d, p_max, scan.p_steps, &scan.r_values, args.mode)?;
    let config = effective(&json!({
        "command": "admissible_scan",
        "equation": args.equation,
        "d": args.d,
        "mode": args.mode,
        "p_max": scan.p_max,
        "p_steps": scan.p_steps,
        "r_values": scan.r_values,
    }));
    let meta = Meta::new("admissible", &config, None).with("third_condition", effective(&args.mode).as_str().unwrap_or_default());
    let mut sink = Sink::new(&scan.out);
    let path = match scan.format {
        Format::Csv => {
            let mut body = format!("{}\n", RegionRow::CSV_HEADER);
            for row in &rows {
                body.push_str(&row.csv_row());
                body.push('\n');
            }
            sink.csv("region.csv", &meta, &body)?
        }
        Format::Json => sink.json("region.json", &json!({ "meta": meta, "config": config, "rows": rows }))?,
    };
    sink.finish(&meta, "ok")?;
    let feasible = rows.iter().filter(|r| r.feasible).count();
    Ok(json!({ "artifact": path, "rows": rows.len(), "feasible": feasible }))
}

pub fn embed(d: u32, p: Exponent, q: Exponent, s1: f64, s2: f64, witness: bool) -> Result<Value, CliError> {
    let query = EmbeddingQuery { p, q, s1: smoothness(s1)?, s2: smoothness(s2)? };
    let verdict = embedding_check(d, &query)?;
    let mut out = json!({
        "d": d,
        "p": p,
        "q": q,
        "s1": s1,
        "s2": s2,
        "holds": verdict.holds,
        "tau": exact(&verdict.tau),
        "case": verdict.case,
        "margin": exact(&verdict.margin),
    });
    if witness && !verdict.holds {
        let search = embedding_witness_search(d, p, q, s1, s2)?;
        out["witness_search"] = effective(&search);
    }
    Ok(out)
}
