use serde::{Deserialize, Serialize};

use super::{norm, EstimateSpec, SlopeFit};
use crate::error::{Error, Result};
use crate::exponents::{decay_rate, sigma_exponent, Exponent, Rational};
use crate::field::SampledField;
use crate::modnorm::WindowSystem;
use crate::propagators::{apply_propagator, PropagatorKind, PropagatorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveOperator {
    Sine,
    Cosine,
}

/// `n` times log-spaced in `1 + t`, from 0 to `t_max` inclusive.
pub fn log_time_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max <= 100.0) {
        return Err(Error::HypothesisViolated(format!("t_max = {t_max} must lie in (0, 100]")));
    }
    if n < 20 {
        return Err(Error::HypothesisViolated(format!("time grid needs >= 20 points, got {n}")));
    }
    let top = (1.0 + t_max).ln();
    Ok((0..n).map(|j| (top * j as f64 / (n - 1) as f64).exp_m1()).collect())
}

/// What is measured: `‖P(t)f‖_{out} ≤ C·bound(t)·‖f‖_{in}`.
struct DecaySetup {
    kind: PropagatorKind,
    out: (Exponent, Exponent, f64),
    input: (Exponent, Exponent, f64),
    /// `bound(t) = (1 + t^power_of_t)^exponent`
    t_power: i32,
    exponent: f64,
    /// Predicted log–log slope against `1 + t`.
    predicted: f64,
    times: Vec<f64>,
}

fn to_f64(r: Rational) -> f64 {
    crate::exponents::rational_to_f64(&r)
}

fn setup(est: &EstimateSpec, d: usize) -> Result<DecaySetup> {
    let d32 = d as u32;
    let grow = |p: Exponent| to_f64(decay_rate(d32, p)).abs();
    Ok(match *est {
        EstimateSpec::KgDecay { p, q, s, theta, t_max, t_points } => {
            let rate = theta * to_f64(decay_rate(d32, p));
            let shift = theta * to_f64(sigma_exponent(d32, p)?);
            DecaySetup {
                kind: PropagatorKind::KgGroup,
                out: (p, q, s),
                input: (p.dual()?, q, s + shift),
                t_power: 1,
                exponent: -rate,
                predicted: -rate,
                times: log_time_grid(t_max, t_points)?,
            }
        }
        EstimateSpec::SchrodingerDecay { p, q, alpha, t_max, t_points } => {
            let rate = 2.0 / alpha * to_f64(decay_rate(d32, p));
            DecaySetup {
                kind: PropagatorKind::FracSchrodinger { alpha },
                out: (p, q, 0.0),
                input: (p.dual()?, q, 0.0),
                t_power: 1,
                exponent: -rate,
                predicted: -rate,
                times: log_time_grid(t_max, t_points)?,
            }
        }
        EstimateSpec::FracBounded { p, q, alpha, t_max, t_points } => DecaySetup {
            kind: PropagatorKind::FracSchrodinger { alpha },
            out: (p, q, 0.0),
            input: (p, q, 0.0),
            t_power: 1,
            exponent: grow(p),
            predicted: grow(p),
            times: log_time_grid(t_max, t_points)?,
        },
        EstimateSpec::KgBounded { p, q, s, t_max, t_points } => DecaySetup {
            kind: PropagatorKind::KgGroup,
            out: (p, q, s),
            input: (p, q, s),
            t_power: 1,
            exponent: grow(p),
            predicted: grow(p),
            times: log_time_grid(t_max, t_points)?,
        },
        EstimateSpec::WaveGrowth { p, q, s, operator, t_max, t_points } => DecaySetup {
            kind: match operator {
                WaveOperator::Sine => PropagatorKind::WaveSine,
                WaveOperator::Cosine => PropagatorKind::WaveCosine,
            },
            out: (p, q, s),
            input: (p, q, s),
            t_power: 2,
            exponent: d as f64 / 4.0,
            predicted: d as f64 / 2.0,
            times: log_time_grid(t_max, t_points)?,
        },
        _ => {
            return Err(Error::NotApplicable(format!("`{}` is not a propagator bound", est.id())))
        }
    })
}

fn violated(msg: impl Into<String>) -> Error {
    Error::HypothesisViolated(msg.into())
}

fn at_least_two(name: &str, p: Exponent) -> Result<()> {
    if p.recip() > Rational::new(1, 2) {
        return Err(violated(format!("{name} = {p} must be >= 2")));
    }
    Ok(())
}

pub(super) fn check_hypotheses(est: &EstimateSpec) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    match *est {
        EstimateSpec::KgDecay { p, q, theta, .. } => {
            at_least_two("p", p)?;
            if q.is_infinite() {
                return Err(violated("q must be finite"));
            }
            if !(0.0..=1.0).contains(&theta) {
                return Err(violated(format!("theta = {theta} must lie in [0, 1]")));
            }
            notes.push("weights are bounded on the truncated box lattice; see kmax".into());
        }
        EstimateSpec::SchrodingerDecay { p, q, alpha, .. } => {
            if !(alpha >= 2.0) {
                return Err(violated(format!("alpha = {alpha} must be >= 2")));
            }
            at_least_two("p", p)?;
            at_least_two("q", q)?;
            if alpha > 2.0 {
                notes.push("alpha > 2: slope mismatches are reported, not resolved".into());
            }
        }
        EstimateSpec::FracBounded { alpha, .. } => {
            if !(alpha > 0.5 && alpha <= 2.0) {
                return Err(violated(format!("alpha = {alpha} must lie in (1/2, 2]")));
            }
        }
        EstimateSpec::KgBounded { .. } => {}
        EstimateSpec::WaveGrowth { t_max, operator, .. } => {
            if t_max > 50.0 {
                return Err(violated(format!("t_max = {t_max} exceeds 50")));
            }
            if operator == WaveOperator::Sine {
                notes.push("sine multiplier equals t at the origin".into());
            }
        }
        _ => {
            setup(est, 1)?;
        }
    }
    Ok(notes)
}

/// Least-squares slope shared across samples, each with its own intercept.
fn pooled_slope(x: &[f64], series: &[Vec<f64>]) -> Option<(f64, f64)> {
    let m = x.len();
    let n = series.len();
    if m < 3 || n == 0 {
        return None;
    }
    let xbar = x.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let mut sxy = 0.0;
    for y in series {
        let ybar = y.iter().sum::<f64>() / m as f64;
        sxy += x.iter().zip(y).map(|(a, b)| (a - xbar) * (b - ybar)).sum::<f64>();
    }
    let slope = sxy / (n as f64 * sxx);
    let mut sse = 0.0;
    for y in series {
        let ybar = y.iter().sum::<f64>() / m as f64;
        sse += x.iter().zip(y).map(|(a, b)| (b - ybar - slope * (a - xbar)).powi(2)).sum::<f64>();
    }
    let dof = (n * m).saturating_sub(n + 1).max(1);
    let stderr = (sse / dof as f64 / (n as f64 * sxx)).sqrt();
    Some((slope, stderr))
}

pub(super) fn evaluate(
    est: &EstimateSpec,
    fields: &[SampledField],
    ws: &WindowSystem,
) -> Result<(Vec<Option<f64>>, Option<SlopeFit>)> {
    let cfg = setup(est, ws.grid().dim())?;
    let floor = super::NORM_FLOOR * super::corpus_scale(fields);
    let late: Vec<usize> = (0..cfg.times.len()).filter(|&j| cfg.times[j] >= 1.0).collect();
    let x: Vec<f64> = late.iter().map(|&j| (1.0 + cfg.times[j]).ln()).collect();
    let mut ratios = Vec::with_capacity(fields.len());
    let mut series = Vec::new();
    for f in fields {
        if f.spectral_l2() <= floor {
            ratios.push(None);
            continue;
        }
        let (p, q, s) = cfg.input;
        let rhs = norm(f, p, q, s, ws)?;
        let mut worst = 0.0f64;
        let mut lhs_series = Vec::with_capacity(cfg.times.len());
        for &t in &cfg.times {
            let moved = apply_propagator(f, &PropagatorSpec::new(cfg.kind, t)?)?;
            let (p, q, s) = cfg.out;
            let lhs = norm(&moved, p, q, s, ws)?;
            let bound = (1.0 + t.powi(cfg.t_power)).powf(cfg.exponent);
            worst = worst.max(lhs / (bound * rhs));
            lhs_series.push(lhs);
        }
        if !worst.is_finite() {
            return Err(Error::NonFinite("decay ratio".into()));
        }
        ratios.push(Some(worst));
        series.push(late.iter().map(|&j| lhs_series[j].ln()).collect::<Vec<f64>>());
    }
    let slope = pooled_slope(&x, &series)
        .map(|(slope, stderr)| SlopeFit { slope, stderr, predicted: cfg.predicted });
    Ok((ratios, slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{verify_decay, Verdict, VerifyPlan};

    #[test]
    fn time_grid_shape() {
        let t = log_time_grid(100.0, 24).unwrap();
        assert_eq!(t.len(), 24);
        assert_eq!(t[0], 0.0);
        assert!((t[23] - 100.0).abs() < 1e-9);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(log_time_grid(100.0, 10).is_err());
        assert!(log_time_grid(200.0, 30).is_err());
    }

    #[test]
    fn pooled_slope_recovers_lines() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let series: Vec<Vec<f64>> =
            (0..3).map(|k| x.iter().map(|v| -0.25 * v + k as f64).collect()).collect();
        let (s, e) = pooled_slope(&x, &series).unwrap();
        assert!((s + 0.25).abs() < 1e-12 && e < 1e-12);
    }

    #[test]
    fn gates() {
        let e = |t: &str| t.parse::<Exponent>().unwrap();
        let bad = EstimateSpec::KgDecay { p: e("3/2"), q: e("1"), s: 0.0, theta: 1.0, t_max: 100.0, t_points: 24 };
        assert!(check_hypotheses(&bad).is_err());
        let bad = EstimateSpec::SchrodingerDecay { p: e("4"), q: e("1"), alpha: 2.0, t_max: 100.0, t_points: 24 };
        assert!(check_hypotheses(&bad).is_err());
        let bad = EstimateSpec::FracBounded { p: e("4"), q: e("1"), alpha: 0.4, t_max: 100.0, t_points: 24 };
        assert!(check_hypotheses(&bad).is_err());
    }

    #[test]
    fn isometric_level_has_flat_slope() {
        let mut plan = VerifyPlan::default_for("kg_decay").unwrap();
        plan.grid = crate::field::GridSpec::new(1, 2048, 256.0).unwrap();
        plan.corpus.count = 6;
        plan.check_resolution = false;
        let two: Exponent = "2".parse().unwrap();
        plan.estimate = EstimateSpec::KgDecay { p: two, q: two, s: 0.0, theta: 1.0, t_max: 100.0, t_points: 20 };
        let r = verify_decay(&plan).unwrap();
        let fit = r.slope.unwrap();
        assert_eq!(fit.predicted, 0.0);
        assert!(fit.slope.abs() <= 0.1, "{fit:?}");
        assert_ne!(r.verdict, Verdict::Violated);
    }
}
