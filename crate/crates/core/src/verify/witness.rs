use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{embedding_check, rational_to_f64, smoothness, EmbeddingQuery, Exponent};
use crate::field::{GridSpec, SampledField};
use crate::modnorm::{bessel_potential, build_windows, modulation_norm, NormSpec, TransitionProfile};

/// Required growth of the norm ratio across the parameter steps.
pub const WITNESS_GROWTH: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    /// `e^{-π|x|²} e^{2πi m x₀}`.
    ModulatedGaussian,
    /// `Π_i Σ_{k<M} e^{-π x_i²} e^{2πi k x_i}`.
    BoxSum,
    /// `e^{-πλ²|x|²}`.
    DilatedGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyAttempt {
    pub family: WitnessFamily,
    pub parameters: Vec<f64>,
    /// `‖f‖_{M^{p,q}_{s₂}} / ‖J_{s₁} f‖_{L^p}` per parameter.
    pub ratios: Vec<f64>,
    pub growth: f64,
    pub monotone: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessSearch {
    pub d: u32,
    pub p: Exponent,
    pub q: Exponent,
    pub s1: f64,
    pub s2: f64,
    /// `τ(p, q) − (s₁ − s₂)`.
    pub deficit: f64,
    pub grid: GridSpec,
    pub attempts: Vec<FamilyAttempt>,
    pub witness: Option<FamilyAttempt>,
}

fn member(grid: &GridSpec, family: WitnessFamily, param: f64) -> Result<SampledField> {
    use std::f64::consts::{PI, TAU};
    SampledField::from_fn(*grid, |x| match family {
        WitnessFamily::ModulatedGaussian => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::from_polar((-PI * r2).exp(), TAU * param * x[0])
        }
        WitnessFamily::BoxSum => x
            .iter()
            .map(|&xi| {
                let env = (-PI * xi * xi).exp();
                (0..param as usize)
                    .map(|k| Complex64::from_polar(env, TAU * k as f64 * xi))
                    .sum::<Complex64>()
            })
            .product(),
        WitnessFamily::DilatedGaussian => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-PI * param * param * r2).exp(), 0.0)
        }
    })
}

fn search_grid(d: u32) -> Result<(GridSpec, [f64; 3])> {
    match d {
        1 => Ok((GridSpec::new(1, 2048, 16.0)?, [4.0, 8.0, 16.0])),
        2 => Ok((GridSpec::new(2, 256, 8.0)?, [2.0, 4.0, 8.0])),
        3 => Ok((GridSpec::new(3, 64, 4.0)?, [1.0, 2.0, 4.0])),
        _ => Err(Error::InvalidGrid(format!("no witness grid for d = {d}"))),
    }
}

/// Looks for a field family whose `L^p_{s₁}`-to-`M^{p,q}_{s₂}` ratio grows
/// monotonically by at least [`WITNESS_GROWTH`] over three dyadic steps.
pub fn embedding_witness_search(
    d: u32,
    p: Exponent,
    q: Exponent,
    s1: f64,
    s2: f64,
) -> Result<WitnessSearch> {
    let query = EmbeddingQuery { p, q, s1: smoothness(s1)?, s2: smoothness(s2)? };
    let verdict = embedding_check(d, &query)?;
    if verdict.holds {
        return Err(Error::HypothesisViolated(format!(
            "the inclusion holds (margin {}); nothing to witness",
            verdict.margin
        )));
    }
    let (grid, steps) = search_grid(d)?;
    let ws = build_windows(&grid, TransitionProfile::Smooth)?;
    let spec = NormSpec::new(p.to_f64(), q.to_f64(), s2)?;
    let mut attempts = Vec::new();
    let mut witness = None;
    for family in [WitnessFamily::ModulatedGaussian, WitnessFamily::BoxSum, WitnessFamily::DilatedGaussian] {
        let ratios: Result<Vec<f64>> = steps
            .iter()
            .map(|&m| {
                let f = member(&grid, family, m)?;
                let top = modulation_norm(&f, &spec, &ws)?;
                let bottom = bessel_potential(&f, s1)?.lp_norm(p.to_f64())?;
                Ok(top / bottom)
            })
            .collect();
        let attempt = match ratios {
            Ok(r) => FamilyAttempt {
                family,
                parameters: steps.to_vec(),
                growth: r[2] / r[0],
                monotone: r.windows(2).all(|w| w[1] > w[0]),
                ratios: r,
                error: None,
            },
            Err(e) => FamilyAttempt {
                family,
                parameters: steps.to_vec(),
                ratios: vec![],
                growth: f64::NAN,
                monotone: false,
                error: Some(e.to_string()),
            },
        };
        let found = attempt.monotone && attempt.growth >= WITNESS_GROWTH;
        attempts.push(attempt.clone());
        if found {
            witness = Some(attempt);
            break;
        }
    }
    Ok(WitnessSearch {
        d,
        p,
        q,
        s1,
        s2,
        deficit: -rational_to_f64(&verdict.margin),
        grid,
        attempts,
        witness,
    })
}
