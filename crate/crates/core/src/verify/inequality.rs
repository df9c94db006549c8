use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{corpus_scale, norm, EstimateSpec, NORM_FLOOR};
use crate::error::{Error, Result};
use crate::exponents::{gamma_from_p, smoothness, Exponent, Rational};
use crate::field::SampledField;
use crate::kernels::{fractional_integral, hartree_nonlinearity, HartreeKernel, ZeroModePolicy};
use crate::modnorm::{bessel_potential, WindowSystem};

/// Fields consumed by one sample.
pub(super) fn arity(est: &EstimateSpec) -> Result<usize> {
    Ok(match est {
        EstimateSpec::Algebra { .. }
        | EstimateSpec::Lipschitz { .. }
        | EstimateSpec::LipschitzDual { .. } => 2,
        EstimateSpec::BesselIso { .. }
        | EstimateSpec::Hls { .. }
        | EstimateSpec::ModHls { .. }
        | EstimateSpec::Nonlinear { .. }
        | EstimateSpec::EmbeddingChain { .. }
        | EstimateSpec::EmbeddingMonotone { .. } => 1,
        other => {
            return Err(Error::NotApplicable(format!("`{}` is not a static estimate", other.id())))
        }
    })
}

fn violated(msg: impl Into<String>) -> Error {
    Error::HypothesisViolated(msg.into())
}

fn exact(name: &str, v: f64) -> Result<Rational> {
    smoothness(v).map_err(|_| violated(format!("{name} = {v} is not representable")))
}

/// `a < b` as Lebesgue exponents.
fn below(a: Exponent, b: Exponent) -> bool {
    a.recip() > b.recip()
}

fn finite_above_one(name: &str, p: Exponent) -> Result<()> {
    if p.is_infinite() || p.recip() >= Rational::one() {
        return Err(violated(format!("{name} = {p} must lie in (1, inf)")));
    }
    Ok(())
}

fn gamma_in_range(gamma: f64, d: usize) -> Result<Rational> {
    let g = exact("gamma", gamma)?;
    if !(g > Rational::zero() && g < Rational::from_integer(d as i128)) {
        return Err(violated(format!("gamma = {gamma} must lie in (0, {d})")));
    }
    Ok(g)
}

/// `1/p + γ/d − 1`.
fn hls_target(p: Exponent, gamma: Rational, d: usize) -> Rational {
    p.recip() + gamma / Rational::from_integer(d as i128) - Rational::one()
}

fn nonnegative(name: &str, s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(violated(format!("{name} = {s} must be >= 0")));
    }
    Ok(())
}

fn nonlinear_exponent_relation(p: Exponent, gamma: f64, d: usize) -> Result<()> {
    finite_above_one("p", p)?;
    let g = gamma_in_range(gamma, d)?;
    let target = hls_target(p, g, d);
    // 1/(p+ε) = target with ε > 0 means 0 < target < 1/p.
    if !(target > Rational::zero() && target < p.recip()) {
        return Err(violated(format!(
            "1/p + gamma/d - 1 = {target} is not 1/(p + eps) for any eps > 0"
        )));
    }
    Ok(())
}

/// Rejects exponent tuples outside the estimate's hypotheses; returns notes.
pub(super) fn check_hypotheses(est: &EstimateSpec, d: usize) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    match *est {
        EstimateSpec::Algebra { p0, p1, p2, q0, q1, q2, s } => {
            nonnegative("s", s)?;
            if p1.recip() + p2.recip() != p0.recip() {
                return Err(violated(format!("1/p1 + 1/p2 = 1/p0 fails for ({p1}, {p2}, {p0})")));
            }
            if q1.recip() + q2.recip() != Rational::one() + q0.recip() {
                return Err(violated(format!(
                    "1/q1 + 1/q2 = 1 + 1/q0 fails for ({q1}, {q2}, {q0})"
                )));
            }
        }
        EstimateSpec::BesselIso { s, sigma, .. } => {
            if !(s.is_finite() && sigma.is_finite()) {
                return Err(violated("s and sigma must be finite"));
            }
        }
        EstimateSpec::Hls { gamma, p, q } => {
            finite_above_one("p", p)?;
            finite_above_one("q", q)?;
            if !below(p, q) {
                return Err(violated(format!("p = {p} must be below q = {q}")));
            }
            let g = gamma_in_range(gamma, d)?;
            if hls_target(p, g, d) != q.recip() {
                return Err(violated(format!("1/p + gamma/d - 1 = 1/q fails for q = {q}")));
            }
        }
        EstimateSpec::ModHls { gamma, p1, p2, s, .. } => {
            nonnegative("s", s)?;
            finite_above_one("p1", p1)?;
            finite_above_one("p2", p2)?;
            if !below(p1, p2) {
                return Err(violated(format!("p1 = {p1} must be below p2 = {p2}")));
            }
            let g = gamma_in_range(gamma, d)?;
            if hls_target(p1, g, d) != p2.recip() {
                return Err(violated(format!("1/p1 + gamma/d - 1 = 1/p2 fails for p2 = {p2}")));
            }
        }
        EstimateSpec::Nonlinear { p, gamma, power, s } => {
            nonnegative("s", s)?;
            if power == 0 {
                return Err(violated("power must be at least 1"));
            }
            nonlinear_exponent_relation(p, gamma, d)?;
        }
        EstimateSpec::Lipschitz { p, gamma, s } => {
            nonnegative("s", s)?;
            nonlinear_exponent_relation(p, gamma, d)?;
        }
        EstimateSpec::LipschitzDual { p, s, override_range } => {
            nonnegative("s", s)?;
            let two = Rational::new(1, 2);
            // 2 < p < 2p′ reads 1/2 > 1/p > 1/4 in reciprocals.
            if !(p.recip() < two && p.recip() > Rational::new(1, 4)) {
                return Err(violated(format!("2 < p < 2p' fails for p = {p}")));
            }
            let info = gamma_from_p(d as u32, p, override_range)
                .map_err(|e| violated(e.to_string()))?;
            notes.push(format!("gamma = {} from 1/p + gamma/d - 1 = 1/(2p')", info.gamma));
            notes.push("gamma < d confines p to (2, 3) inside 2 < p < 2p'".into());
        }
        EstimateSpec::EmbeddingChain { p, q1, q2 } => {
            let pd = p.dual()?;
            let (lo, hi) = if below(p, pd) { (p, pd) } else { (pd, p) };
            if below(lo, q1) {
                return Err(violated(format!("q1 = {q1} exceeds min(p, p') = {lo}")));
            }
            if below(q2, hi) {
                return Err(violated(format!("q2 = {q2} is below max(p, p') = {hi}")));
            }
        }
        EstimateSpec::EmbeddingMonotone { p1, q1, s1, p2, q2, s2 } => {
            if below(p2, p1) || below(q2, q1) || s2 > s1 {
                return Err(violated("need p1 <= p2, q1 <= q2 and s2 <= s1"));
            }
        }
        _ => {
            arity(est)?;
        }
    }
    Ok(notes)
}

fn lipschitz_step(index: usize) -> f64 {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    0.05 + 0.95 * ((index + 1) as f64 * golden).fract()
}

/// `(lhs, rhs)` pairs for one sample; the ratio is the largest `lhs/rhs`.
fn sides(
    est: &EstimateSpec,
    inputs: &[SampledField],
    index: usize,
    ws: &WindowSystem,
) -> Result<Vec<(f64, f64)>> {
    let d = ws.grid().dim();
    let one = Exponent::from_ratio(Rational::one())?;
    Ok(match *est {
        EstimateSpec::Algebra { p0, p1, p2, q0, q1, q2, s } => {
            let prod = inputs[0].mul(&inputs[1])?;
            vec![(
                norm(&prod, p0, q0, s, ws)?,
                norm(&inputs[0], p1, q1, s, ws)? * norm(&inputs[1], p2, q2, s, ws)?,
            )]
        }
        EstimateSpec::BesselIso { p, q, s, sigma } => {
            let a = norm(&bessel_potential(&inputs[0], sigma)?, p, q, s - sigma, ws)?;
            let b = norm(&inputs[0], p, q, s, ws)?;
            vec![(a, b), (b, a)]
        }
        EstimateSpec::Hls { gamma, p, q } => {
            let t = fractional_integral(&inputs[0], gamma, ZeroModePolicy::BoxAverage)?;
            vec![(t.lp_norm(q.to_f64())?, inputs[0].lp_norm(p.to_f64())?)]
        }
        EstimateSpec::ModHls { gamma, p1, p2, q, s } => {
            let t = fractional_integral(&inputs[0], gamma, ZeroModePolicy::BoxAverage)?;
            vec![(norm(&t, p2, q, s, ws)?, norm(&inputs[0], p1, q, s, ws)?)]
        }
        EstimateSpec::Nonlinear { p, gamma, power, s } => {
            let kernel =
                HartreeKernel::riesz(ws.grid(), 1.0, gamma, power, ZeroModePolicy::BoxAverage)?;
            let out = hartree_nonlinearity(&inputs[0], &kernel)?;
            let n = norm(&inputs[0], p, one, s, ws)?;
            vec![(norm(&out, p, one, s, ws)?, n.powi(2 * power as i32 + 1))]
        }
        EstimateSpec::Lipschitz { p, gamma, s } => {
            let kernel = HartreeKernel::riesz(ws.grid(), 1.0, gamma, 1, ZeroModePolicy::BoxAverage)?;
            difference_sides(&kernel, inputs, index, p, p, s, ws)?
        }
        EstimateSpec::LipschitzDual { p, s, override_range } => {
            let gamma = gamma_from_p(d as u32, p, override_range)?.gamma_f64;
            let kernel = HartreeKernel::riesz(ws.grid(), 1.0, gamma, 1, ZeroModePolicy::BoxAverage)?;
            difference_sides(&kernel, inputs, index, p.dual()?, p, s, ws)?
        }
        EstimateSpec::EmbeddingChain { p, q1, q2 } => {
            let lp = inputs[0].lp_norm(p.to_f64())?;
            vec![(lp, norm(&inputs[0], p, q1, 0.0, ws)?), (norm(&inputs[0], p, q2, 0.0, ws)?, lp)]
        }
        EstimateSpec::EmbeddingMonotone { p1, q1, s1, p2, q2, s2 } => {
            vec![(norm(&inputs[0], p2, q2, s2, ws)?, norm(&inputs[0], p1, q1, s1, ws)?)]
        }
        _ => unreachable!("dispatch covers static estimates only"),
    })
}

fn difference_sides(
    kernel: &HartreeKernel,
    inputs: &[SampledField],
    index: usize,
    p_out: Exponent,
    p_in: Exponent,
    s: f64,
    ws: &WindowSystem,
) -> Result<Vec<(f64, f64)>> {
    let one = Exponent::from_ratio(Rational::one())?;
    let f = &inputs[0];
    let g = f.combine(Complex64::new(1.0, 0.0), &inputs[1], Complex64::new(lipschitz_step(index), 0.0))?;
    let lhs = hartree_nonlinearity(f, kernel)?.sub(&hartree_nonlinearity(&g, kernel)?)?;
    let nf = norm(f, p_in, one, s, ws)?;
    let ng = norm(&g, p_in, one, s, ws)?;
    let diff = norm(&f.sub(&g)?, p_in, one, s, ws)?;
    Ok(vec![(norm(&lhs, p_out, one, s, ws)?, (nf * nf + nf * ng + ng * ng) * diff)])
}

fn sample_ratio(
    est: &EstimateSpec,
    inputs: &[SampledField],
    index: usize,
    ws: &WindowSystem,
) -> Result<f64> {
    let pairs = sides(est, inputs, index, ws)?;
    let mut worst = 0.0f64;
    for (lhs, rhs) in pairs {
        let r = lhs / rhs;
        if !r.is_finite() {
            return Err(Error::NonFinite(format!("ratio {lhs}/{rhs} in sample {index}")));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Per-sample ratios; `None` marks a skipped sample.
pub(super) fn evaluate(
    est: &EstimateSpec,
    fields: &[SampledField],
    ws: &WindowSystem,
) -> Result<Vec<Option<f64>>> {
    let a = arity(est)?;
    let floor = NORM_FLOOR * corpus_scale(fields);
    fields
        .chunks_exact(a)
        .enumerate()
        .map(|(j, inputs)| {
            if inputs.iter().any(|f| f.spectral_l2() <= floor) {
                return Ok(None);
            }
            sample_ratio(est, inputs, j, ws).map(Some)
        })
        .collect()
}

/// Relative change of the first usable ratio when all inputs are scaled.
pub(super) fn scaling_deviation(
    est: &EstimateSpec,
    fields: &[SampledField],
    ws: &WindowSystem,
    ratios: &[Option<f64>],
) -> Result<Option<f64>> {
    let a = arity(est)?;
    let Some((j, base)) = ratios.iter().enumerate().find_map(|(j, r)| r.map(|v| (j, v))) else {
        return Ok(None);
    };
    let mut worst = 0.0f64;
    for c in [0.4, 2.5] {
        let scaled: Vec<SampledField> =
            fields[j * a..(j + 1) * a].iter().map(|f| f.scale(Complex64::new(c, 0.0))).collect();
        let r = sample_ratio(est, &scaled, j, ws)?;
        worst = worst.max((r / base - 1.0).abs());
    }
    Ok(Some(worst))
}
