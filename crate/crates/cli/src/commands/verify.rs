use modspace::verify::{run_plan, ESTIMATES};
use modspace::{EstimateReport, VerifyPlan};
use serde::Serialize;
use serde_json::{json, Value};

use super::{effective, Invocation};
use crate::artifacts::{Meta, Sink};
use crate::config::VerifySection;
use crate::error::CliError;

#[derive(Serialize)]
struct VerifyOutput<'a> {
    meta: &'a Meta,
    config: &'a Value,
    report: &'a EstimateReport,
}

pub fn list() -> Value {
    Value::Array(ESTIMATES.iter().map(|(id, about)| json!({ "id": id, "description": about })).collect())
}

/// Default plan for the estimate with the config section and seed laid over it.
pub fn resolve_plan(estimate: Option<&str>, section: Option<&VerifySection>, seed: Option<u64>) -> Result<VerifyPlan, CliError> {
    let from_config = section.and_then(|s| s.estimate.as_deref());
    let id = match (estimate, from_config) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Validation(format!(
                "invalid configuration at `verify.estimate`: `{b}` conflicts with --estimate {a}"
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(CliError::Validation("no estimate given; pass --estimate or set verify.estimate".into())),
    };
    let base = VerifyPlan::default_for(id).map_err(|e| CliError::at("verify.estimate", e))?;
    let mut plan = effective(&base);
    if let Some(s) = section {
        if let Some(g) = s.grid {
            plan["grid"] = effective(&g);
        }
        if let Some(c) = &s.corpus {
            merge(&mut plan["corpus"], c);
        }
        if let Some(p) = &s.params {
            for (k, v) in p {
                if k == "id" {
                    return Err(CliError::Validation("invalid configuration at `verify.params.id`: use verify.estimate".into()));
                }
                plan["estimate"][k] = v.clone();
            }
        }
        if let Some(f) = s.train_fraction {
            plan["train_fraction"] = json!(f);
        }
        if let Some(r) = s.check_resolution {
            plan["check_resolution"] = json!(r);
        }
    }
    if let Some(seed) = seed {
        plan["corpus"]["generator"]["seed"] = json!(seed);
    }
    let plan: VerifyPlan = serde_path_to_error::deserialize(plan).map_err(|e| {
        let path = e.path().to_string().replacen("estimate", "params", 1);
        CliError::Validation(format!("invalid configuration at `verify.{path}`: {}", e.into_inner()))
    })?;
    plan.validate().map_err(|e| CliError::at("verify", e))?;
    Ok(plan)
}

fn merge(target: &mut Value, patch: &Value) {
    match (target, patch) {
        (Value::Object(t), Value::Object(p)) => {
            for (k, v) in p {
                merge(t.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (t, p) => *t = p.clone(),
    }
}

pub fn run(inv: &Invocation, estimate: Option<&str>) -> Result<Value, CliError> {
    let plan = resolve_plan(estimate, inv.config.verify.as_ref(), inv.seed())?;
    let report = run_plan(&plan)?;
    let config = effective(&json!({ "command": "verify", "plan": plan }));
    let meta = Meta::new("verify", &config, Some(plan.corpus.seed()))
        .with("estimate", plan.estimate.id())
        .with("kmax", report.kmax);
    let mut sink = Sink::new(&inv.output_dir());
    let path = sink.json("report.json", &VerifyOutput { meta: &meta, config: &config, report: &report })?;
    sink.csv("ratios.csv", &meta, &report.ratios_csv())?;
    sink.finish(&meta, &format!("{:?}", report.verdict).to_lowercase())?;
    Ok(json!({
        "report": path,
        "estimate": report.estimate_id,
        "verdict": report.verdict,
        "train_constant": report.train_constant,
        "holdout_max": report.holdout_max,
        "stability_delta": report.stability_delta,
    }))
}
