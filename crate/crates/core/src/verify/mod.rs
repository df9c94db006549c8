//! Estimate verification: fitted constants, holdout checks and decay slopes
//! over deterministic field corpora.

mod corpus;
mod decay;
mod inequality;
mod strichartz;
mod witness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{CaseTag, Exponent, ThirdConditionMode};
use crate::field::{GridSpec, SampledField};
use crate::modnorm::{build_windows, NormSpec, TransitionProfile, WindowSystem};

pub use corpus::{CorpusGenerator, FieldCorpus};
pub use decay::{log_time_grid, WaveOperator};
pub use strichartz::{single_mode_self_consistency, StrichartzEquation};
pub use witness::{embedding_witness_search, FamilyAttempt, WitnessFamily, WitnessSearch, WITNESS_GROWTH};

/// Allowed holdout excess over the training constant.
pub const HOLDOUT_SLACK: f64 = 1.05;
/// Largest relative change of the fitted constant under grid refinement.
pub const STABILITY_LIMIT: f64 = 0.2;
/// Slack on fitted decay slopes.
pub const SLOPE_SLACK: f64 = 0.15;
/// Smallest increase of the holdout excess that counts as growth under refinement.
pub const EXCESS_GROWTH: f64 = 1e-6;
/// Inputs below this fraction of the corpus scale are skipped.
pub const NORM_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Holdout,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRatio {
    pub index: usize,
    pub split: Split,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionCheck {
    pub n: usize,
    pub train_constant: f64,
    pub holdout_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub exponents: BTreeMap<String, String>,
    pub grid: GridSpec,
    pub kmax: i64,
    pub corpus_size: usize,
    pub evaluated: usize,
    pub skipped: Vec<usize>,
    pub samples: Vec<SampleRatio>,
    pub train_constant: f64,
    pub holdout_max: f64,
    pub refined: Option<ResolutionCheck>,
    pub stability_delta: Option<f64>,
    pub slope: Option<SlopeFit>,
    pub scaling_deviation: Option<f64>,
    pub case_tag: Option<CaseTag>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "index,split,ratio";

    pub fn holdout_excess(&self) -> f64 {
        self.holdout_max / self.train_constant
    }

    pub fn ratios_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let split = match s.split {
                Split::Train => "train",
                Split::Holdout => "holdout",
            };
            out.push_str(&format!("{},{},{:e}\n", s.index, split, s.ratio));
        }
        out
    }
}

/// Every verifiable estimate with its exponent tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimateSpec {
    /// `‖fg‖_{M^{p0,q0}_s} ≤ C‖f‖_{M^{p1,q1}_s}‖g‖_{M^{p2,q2}_s}`.
    Algebra { p0: Exponent, p1: Exponent, p2: Exponent, q0: Exponent, q1: Exponent, q2: Exponent, s: f64 },
    /// Two-sided `‖J_σ f‖_{M^{p,q}_{s-σ}} ≍ ‖f‖_{M^{p,q}_s}`.
    BesselIso { p: Exponent, q: Exponent, s: f64, sigma: f64 },
    /// `‖T_γ f‖_{L^q} ≤ C‖f‖_{L^p}`.
    Hls { gamma: f64, p: Exponent, q: Exponent },
    /// `‖T_γ f‖_{M^{p2,q}_s} ≤ C‖f‖_{M^{p1,q}_s}`.
    ModHls { gamma: f64, p1: Exponent, p2: Exponent, q: Exponent, s: f64 },
    /// `‖(|x|^{-γ} ∗ |f|^{2k})f‖_{M^{p,1}_s} ≤ C‖f‖^{2k+1}_{M^{p,1}_s}`.
    Nonlinear { p: Exponent, gamma: f64, power: u32, s: f64 },
    /// Cubic difference bound in `M^{p,1}_s`.
    Lipschitz { p: Exponent, gamma: f64, s: f64 },
    /// Cubic difference bound with output in `M^{p′,1}_s` and `γ` fixed by `p`.
    LipschitzDual {
        p: Exponent,
        s: f64,
        #[serde(default)]
        override_range: bool,
    },
    /// `‖f‖_{L^p} ≤ C‖f‖_{M^{p,q1}}` and `‖f‖_{M^{p,q2}} ≤ C‖f‖_{L^p}`.
    EmbeddingChain { p: Exponent, q1: Exponent, q2: Exponent },
    /// `‖f‖_{M^{p2,q2}_{s2}} ≤ C‖f‖_{M^{p1,q1}_{s1}}`.
    EmbeddingMonotone { p1: Exponent, q1: Exponent, s1: f64, p2: Exponent, q2: Exponent, s2: f64 },
    KgDecay { p: Exponent, q: Exponent, s: f64, theta: f64, t_max: f64, t_points: usize },
    SchrodingerDecay { p: Exponent, q: Exponent, alpha: f64, t_max: f64, t_points: usize },
    FracBounded { p: Exponent, q: Exponent, alpha: f64, t_max: f64, t_points: usize },
    KgBounded { p: Exponent, q: Exponent, s: f64, t_max: f64, t_points: usize },
    WaveGrowth { p: Exponent, q: Exponent, s: f64, operator: WaveOperator, t_max: f64, t_points: usize },
    StrichartzKg {
        admissible_dim: u32,
        p: Exponent,
        r: Exponent,
        s: f64,
        horizon: f64,
        dt: f64,
        #[serde(default)]
        mode: ThirdConditionMode,
    },
    StrichartzSchr {
        admissible_dim: u32,
        p: Exponent,
        r: Exponent,
        s: f64,
        alpha: f64,
        horizon: f64,
        dt: f64,
        #[serde(default)]
        mode: ThirdConditionMode,
    },
}

/// Identifier and one-line description of every estimate.
pub const ESTIMATES: &[(&str, &str)] = &[
    ("algebra", "product estimate in modulation spaces"),
    ("bessel_iso", "Bessel potential as an isomorphism between weighted spaces"),
    ("hls", "fractional integration L^p -> L^q"),
    ("mod_hls", "fractional integration M^{p1,q}_s -> M^{p2,q}_s"),
    ("nonlinear", "Hartree nonlinearity bound in M^{p,1}_s"),
    ("lipschitz", "cubic Hartree difference bound in M^{p,1}_s"),
    ("lipschitz_dual", "cubic Hartree difference bound with M^{p',1}_s output"),
    ("embedding_chain", "M^{p,q1} -> L^p -> M^{p,q2}"),
    ("embedding_monotone", "monotonicity of modulation spaces in p, q, s"),
    ("kg_decay", "Klein-Gordon group decay M^{p',q}_{s+θ2σ(p)} -> M^{p,q}_s"),
    ("schrodinger_decay", "fractional Schrodinger decay M^{p',q} -> M^{p,q}"),
    ("frac_bounded", "fractional Schrodinger growth bound on M^{p,q}"),
    ("kg_bounded", "Klein-Gordon group growth bound on M^{p,q}_s"),
    ("wave_growth", "wave multipliers growth bound on M^{p,q}_s"),
    ("strichartz_kg", "Klein-Gordon Duhamel term in L^r_t M^{p,1}_s"),
    ("strichartz_schr", "fractional Schrodinger Duhamel term in L^r_t M^{p,1}_s"),
];

impl EstimateSpec {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Algebra { .. } => "algebra",
            Self::BesselIso { .. } => "bessel_iso",
            Self::Hls { .. } => "hls",
            Self::ModHls { .. } => "mod_hls",
            Self::Nonlinear { .. } => "nonlinear",
            Self::Lipschitz { .. } => "lipschitz",
            Self::LipschitzDual { .. } => "lipschitz_dual",
            Self::EmbeddingChain { .. } => "embedding_chain",
            Self::EmbeddingMonotone { .. } => "embedding_monotone",
            Self::KgDecay { .. } => "kg_decay",
            Self::SchrodingerDecay { .. } => "schrodinger_decay",
            Self::FracBounded { .. } => "frac_bounded",
            Self::KgBounded { .. } => "kg_bounded",
            Self::WaveGrowth { .. } => "wave_growth",
            Self::StrichartzKg { .. } => "strichartz_kg",
            Self::StrichartzSchr { .. } => "strichartz_schr",
        }
    }

    /// Exponent tuple as printable strings.
    pub fn exponents(&self) -> BTreeMap<String, String> {
        let value = serde_json::to_value(self).expect("estimate specs serialize");
        let mut out = BTreeMap::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                if k == "id" {
                    continue;
                }
                let text = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                out.insert(k, text);
            }
        }
        out
    }
}

/// Grid, corpus and estimate for one harness run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPlan {
    pub grid: GridSpec,
    pub corpus: FieldCorpus,
    pub estimate: EstimateSpec,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_true")]
    pub check_resolution: bool,
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_true() -> bool {
    true
}

impl VerifyPlan {
    /// Settings tuned for a desk-scale run of the named estimate.
    pub fn default_for(id: &str) -> Result<Self> {
        let e = |t: &str| t.parse::<Exponent>().expect("literal exponent");
        let static_grid = GridSpec::new(1, 512, 16.0)?;
        let decay_grid = GridSpec::new(1, 8192, 1024.0)?;
        let noise = |seed: u64, band: f64, count: usize| {
            FieldCorpus::new(CorpusGenerator::RandomBandlimited { seed, band }, count)
        };
        let packets = |widths: Vec<f64>, modulations: Vec<f64>| {
            FieldCorpus::new(CorpusGenerator::GaussianFamily { widths, modulations, seed: 11 }, 30)
        };
        let (grid, corpus, estimate) = match id {
            "algebra" => (
                static_grid,
                noise(101, 4.0, 120),
                EstimateSpec::Algebra {
                    p0: e("2"),
                    p1: e("4"),
                    p2: e("4"),
                    q0: e("1"),
                    q1: e("1"),
                    q2: e("1"),
                    s: 0.5,
                },
            ),
            "bessel_iso" => (
                static_grid,
                noise(102, 4.0, 120),
                EstimateSpec::BesselIso { p: e("3"), q: e("2"), s: 0.5, sigma: 1.5 },
            ),
            "hls" => (
                static_grid,
                noise(103, 4.0, 120),
                EstimateSpec::Hls { gamma: 0.5, p: e("4/3"), q: e("4") },
            ),
            "mod_hls" => (
                static_grid,
                noise(104, 4.0, 120),
                EstimateSpec::ModHls { gamma: 0.5, p1: e("4/3"), p2: e("4"), q: e("1"), s: 0.0 },
            ),
            "nonlinear" => (
                static_grid,
                noise(105, 4.0, 120),
                EstimateSpec::Nonlinear { p: e("5/2"), gamma: 0.8, power: 1, s: 0.5 },
            ),
            "lipschitz" => (
                static_grid,
                noise(106, 4.0, 120),
                EstimateSpec::Lipschitz { p: e("5/2"), gamma: 0.8, s: 0.5 },
            ),
            "lipschitz_dual" => (
                static_grid,
                noise(107, 4.0, 120),
                EstimateSpec::LipschitzDual { p: e("5/2"), s: 0.5, override_range: false },
            ),
            "embedding_chain" => (
                static_grid,
                noise(108, 4.0, 120),
                EstimateSpec::EmbeddingChain { p: e("3"), q1: e("3/2"), q2: e("3") },
            ),
            "embedding_monotone" => (
                static_grid,
                noise(109, 4.0, 120),
                EstimateSpec::EmbeddingMonotone {
                    p1: e("2"),
                    q1: e("1"),
                    s1: 1.0,
                    p2: e("4"),
                    q2: e("2"),
                    s2: 0.5,
                },
            ),
            "kg_decay" => (
                decay_grid,
                packets(vec![2.0, 3.0, 4.0], vec![0.0, 0.25]),
                EstimateSpec::KgDecay { p: e("4"), q: e("1"), s: 0.0, theta: 1.0, t_max: 100.0, t_points: 24 },
            ),
            "schrodinger_decay" => (
                decay_grid,
                packets(vec![4.0, 6.0, 8.0], vec![0.0, 0.125]),
                EstimateSpec::SchrodingerDecay { p: e("4"), q: e("2"), alpha: 2.0, t_max: 100.0, t_points: 24 },
            ),
            "frac_bounded" => (
                decay_grid,
                packets(vec![2.0, 3.0, 4.0], vec![0.0, 0.25]),
                EstimateSpec::FracBounded { p: e("4"), q: e("1"), alpha: 1.5, t_max: 100.0, t_points: 24 },
            ),
            "kg_bounded" => (
                decay_grid,
                packets(vec![2.0, 3.0, 4.0], vec![0.0, 0.25]),
                EstimateSpec::KgBounded { p: e("4"), q: e("1"), s: 0.0, t_max: 100.0, t_points: 24 },
            ),
            "wave_growth" => (
                decay_grid,
                packets(vec![2.0, 3.0, 4.0], vec![0.0, 0.25]),
                EstimateSpec::WaveGrowth {
                    p: e("4"),
                    q: e("1"),
                    s: 0.0,
                    operator: WaveOperator::Cosine,
                    t_max: 50.0,
                    t_points: 24,
                },
            ),
            "strichartz_kg" => (
                GridSpec::new(1, 256, 16.0)?,
                noise(201, 2.0, 50),
                EstimateSpec::StrichartzKg {
                    admissible_dim: 5,
                    p: e("5/2"),
                    r: e("3"),
                    s: 0.0,
                    horizon: 10.0,
                    dt: 0.05,
                    mode: ThirdConditionMode::default(),
                },
            ),
            "strichartz_schr" => (
                GridSpec::new(1, 256, 16.0)?,
                noise(202, 2.0, 50),
                EstimateSpec::StrichartzSchr {
                    admissible_dim: 5,
                    p: e("5/2"),
                    r: e("3"),
                    s: 0.0,
                    alpha: 2.0,
                    horizon: 10.0,
                    dt: 0.05,
                    mode: ThirdConditionMode::default(),
                },
            ),
            other => {
                return Err(Error::Config {
                    path: "verify.estimate".into(),
                    message: format!("unknown estimate `{other}`"),
                })
            }
        };
        Ok(Self { grid, corpus, estimate, train_fraction: 0.7, check_resolution: true })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config {
                path: "verify.train_fraction".into(),
                message: format!("{} must lie in (0, 1)", self.train_fraction),
            });
        }
        self.corpus.validate(&self.grid)
    }
}

/// Runs the harness for the plan's estimate.
pub fn run_plan(plan: &VerifyPlan) -> Result<EstimateReport> {
    plan.validate()?;
    match &plan.estimate {
        EstimateSpec::KgDecay { .. }
        | EstimateSpec::SchrodingerDecay { .. }
        | EstimateSpec::FracBounded { .. }
        | EstimateSpec::KgBounded { .. }
        | EstimateSpec::WaveGrowth { .. } => verify_decay(plan),
        EstimateSpec::StrichartzKg { .. } | EstimateSpec::StrichartzSchr { .. } => {
            strichartz_check(plan)
        }
        _ => verify_inequality(plan),
    }
}

/// Ratio test for a static (time-independent) estimate.
pub fn verify_inequality(plan: &VerifyPlan) -> Result<EstimateReport> {
    let arity = inequality::arity(&plan.estimate)?;
    let coarse = corpus_fields(plan, &plan.grid, arity)?;
    let refined = if plan.check_resolution {
        let g = plan.grid.refined()?;
        Some((g, corpus_fields(plan, &g, arity)?))
    } else {
        None
    };
    verify_inequality_fields(
        plan,
        &coarse,
        refined.as_ref().map(|(g, f)| (g, f.as_slice())),
    )
}

/// As [`verify_inequality`] on explicit inputs, `arity` fields per sample.
pub fn verify_inequality_fields(
    plan: &VerifyPlan,
    fields: &[SampledField],
    refined: Option<(&GridSpec, &[SampledField])>,
) -> Result<EstimateReport> {
    let est = &plan.estimate;
    let mut notes = inequality::check_hypotheses(est, plan.grid.dim())?;
    let ws = windows(&plan.grid)?;
    let eval = |fields: &[SampledField], ws: &WindowSystem| inequality::evaluate(est, fields, ws);
    let ratios = eval(fields, &ws)?;
    let scaling = inequality::scaling_deviation(est, fields, &ws, &ratios)?;
    let refined_ratios = match refined {
        Some((g, f)) => Some((g.n(), eval(f, &windows(g)?)?)),
        None => None,
    };
    if let Some(dev) = scaling {
        if dev > 1e-6 {
            notes.push(format!("ratio changed by {dev:e} under input scaling"));
        }
    }
    assemble(plan, ratios, refined_ratios, None, scaling, None, notes)
}

/// Slope and ratio test for a propagator bound on a time grid.
pub fn verify_decay(plan: &VerifyPlan) -> Result<EstimateReport> {
    let notes = decay::check_hypotheses(&plan.estimate)?;
    let coarse = corpus_fields(plan, &plan.grid, 1)?;
    let run = |grid: &GridSpec, fields: &[SampledField]| {
        decay::evaluate(&plan.estimate, fields, &windows(grid)?)
    };
    let (ratios, slope) = run(&plan.grid, &coarse)?;
    let refined = if plan.check_resolution {
        let g = plan.grid.refined()?;
        let fine = corpus_fields(plan, &g, 1)?;
        Some((g.n(), run(&g, &fine)?.0))
    } else {
        None
    };
    assemble(plan, ratios, refined, slope, None, None, notes)
}

/// Ratio test for the Duhamel term against the cubed space-time norm.
pub fn strichartz_check(plan: &VerifyPlan) -> Result<EstimateReport> {
    let (case, notes) = strichartz::check_hypotheses(&plan.estimate, plan.grid.dim())?;
    let coarse = corpus_fields(plan, &plan.grid, 1)?;
    let ratios = strichartz::evaluate(&plan.estimate, &coarse, &windows(&plan.grid)?)?;
    let refined = if plan.check_resolution {
        let g = plan.grid.refined()?;
        let fine = corpus_fields(plan, &g, 1)?;
        Some((g.n(), strichartz::evaluate(&plan.estimate, &fine, &windows(&g)?)?))
    } else {
        None
    };
    assemble(plan, ratios, refined, None, None, Some(case), notes)
}

fn windows(grid: &GridSpec) -> Result<WindowSystem> {
    build_windows(grid, TransitionProfile::Smooth)
}

fn corpus_fields(plan: &VerifyPlan, grid: &GridSpec, arity: usize) -> Result<Vec<SampledField>> {
    let corpus = FieldCorpus::new(plan.corpus.generator.clone(), plan.corpus.count * arity);
    corpus.generate(grid)
}

pub(crate) fn norm(f: &SampledField, p: Exponent, q: Exponent, s: f64, ws: &WindowSystem) -> Result<f64> {
    crate::modnorm::modulation_norm(f, &NormSpec::new(p.to_f64(), q.to_f64(), s)?, ws)
}

/// Scale used by the skip rule: largest L² norm over the inputs.
pub(crate) fn corpus_scale(fields: &[SampledField]) -> f64 {
    fields.iter().map(|f| f.spectral_l2()).fold(0.0, f64::max)
}

fn split_ratios(
    ratios: &[Option<f64>],
    train_fraction: f64,
) -> Result<(Vec<SampleRatio>, Vec<usize>, f64, f64)> {
    let kept: Vec<(usize, f64)> =
        ratios.iter().enumerate().filter_map(|(i, r)| r.map(|v| (i, v))).collect();
    let skipped = ratios.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect();
    let n_train = ((kept.len() as f64) * train_fraction).round() as usize;
    if n_train == 0 || n_train >= kept.len() {
        return Err(Error::Config {
            path: "corpus.count".into(),
            message: format!("{} usable samples cannot be split into train and holdout", kept.len()),
        });
    }
    let mut samples = Vec::with_capacity(kept.len());
    let (mut train, mut holdout) = (0.0f64, 0.0f64);
    for (pos, (index, ratio)) in kept.into_iter().enumerate() {
        let split = if pos < n_train { Split::Train } else { Split::Holdout };
        match split {
            Split::Train => train = train.max(ratio),
            Split::Holdout => holdout = holdout.max(ratio),
        }
        samples.push(SampleRatio { index, split, ratio });
    }
    Ok((samples, skipped, train, holdout))
}

fn assemble(
    plan: &VerifyPlan,
    ratios: Vec<Option<f64>>,
    refined: Option<(usize, Vec<Option<f64>>)>,
    slope: Option<SlopeFit>,
    scaling: Option<f64>,
    case_tag: Option<CaseTag>,
    mut notes: Vec<String>,
) -> Result<EstimateReport> {
    let (samples, skipped, train, holdout) = split_ratios(&ratios, plan.train_fraction)?;
    if !skipped.is_empty() {
        notes.push(format!("{} samples skipped (input below the norm floor)", skipped.len()));
    }
    let refined = match refined {
        Some((n, r)) => {
            let (_, _, t, h) = split_ratios(&r, plan.train_fraction)?;
            Some(ResolutionCheck { n, train_constant: t, holdout_max: h })
        }
        None => None,
    };
    let stability_delta = refined.as_ref().map(|r| (r.train_constant / train - 1.0).abs());
    let excess_ok = holdout <= HOLDOUT_SLACK * train;
    let stable = stability_delta.is_some_and(|d| d < STABILITY_LIMIT);
    let slope_ok = slope.as_ref().is_none_or(|s| s.slope <= s.predicted + SLOPE_SLACK);
    let scaling_ok = scaling.is_none_or(|d| d <= 1e-6);
    let verdict = if excess_ok && stable && slope_ok && scaling_ok {
        Verdict::Consistent
    } else if !excess_ok
        && refined
            .as_ref()
            .is_some_and(|r| r.holdout_max / r.train_constant > holdout / train + EXCESS_GROWTH)
    {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    if refined.is_none() {
        notes.push("resolution check disabled; verdict cannot be consistent".into());
    }
    Ok(EstimateReport {
        estimate_id: plan.estimate.id().to_string(),
        exponents: plan.estimate.exponents(),
        grid: plan.grid,
        kmax: crate::modnorm::max_box_index(&plan.grid),
        corpus_size: ratios.len(),
        evaluated: samples.len(),
        skipped,
        samples,
        train_constant: train,
        holdout_max: holdout,
        refined,
        stability_delta,
        slope,
        scaling_deviation: scaling,
        case_tag,
        verdict,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_seventy_thirty_and_skips_missing() {
        let ratios: Vec<Option<f64>> =
            (0..11).map(|i| if i == 3 { None } else { Some(i as f64) }).collect();
        let (samples, skipped, train, holdout) = split_ratios(&ratios, 0.7).unwrap();
        assert_eq!(skipped, vec![3]);
        assert_eq!(samples.iter().filter(|s| s.split == Split::Train).count(), 7);
        assert_eq!(train, 7.0);
        assert_eq!(holdout, 10.0);
    }

    #[test]
    fn every_listed_id_has_a_default_plan() {
        for (id, _) in ESTIMATES {
            let plan = VerifyPlan::default_for(id).unwrap();
            assert_eq!(plan.estimate.id(), *id);
            plan.validate().unwrap();
            let json = serde_json::to_string(&plan).unwrap();
            let back: VerifyPlan = serde_json::from_str(&json).unwrap();
            assert_eq!(back, plan);
        }
        assert!(VerifyPlan::default_for("nope").is_err());
    }

    #[test]
    fn unknown_estimate_keys_are_rejected() {
        let text = r#"{"id":"hls","gamma":0.5,"p":"4/3","q":"4","bogus":1}"#;
        assert!(serde_json::from_str::<EstimateSpec>(text).is_err());
        let text = r#"{"id":"hls","gamma":0.5,"p":"4/3","q":"4"}"#;
        assert!(serde_json::from_str::<EstimateSpec>(text).is_ok());
    }

    #[test]
    fn verdict_rules() {
        let mut plan = VerifyPlan::default_for("hls").unwrap();
        plan.check_resolution = false;
        let flat: Vec<Option<f64>> = vec![Some(1.0); 10];
        let r = assemble(&plan, flat.clone(), None, None, None, None, vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = assemble(&plan, flat.clone(), Some((1024, flat.clone())), None, None, None, vec![])
            .unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        let mut bad = flat.clone();
        bad[9] = Some(2.0);
        let mut worse = flat.clone();
        worse[9] = Some(3.0);
        let r = assemble(&plan, bad.clone(), Some((1024, worse)), None, None, None, vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let r = assemble(&plan, bad.clone(), Some((1024, bad)), None, None, None, vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let slope = SlopeFit { slope: 0.3, stderr: 0.0, predicted: 0.0 };
        let r = assemble(&plan, flat.clone(), Some((1024, flat)), Some(slope), None, None, vec![])
            .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
