//! Exact exponent arithmetic: admissible pairs, the Hartree exponent
//! relation and the Lebesgue-to-modulation embedding test.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A Lebesgue exponent in `[1, ∞]`, stored through its exact reciprocal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent {
    recip: Rational,
}

impl Exponent {
    pub fn infinity() -> Self {
        Self { recip: Rational::zero() }
    }

    /// Any positive exponent; range checks belong to the callers.
    pub fn from_ratio(p: Rational) -> Result<Self> {
        if p <= Rational::zero() {
            return Err(Error::InvalidExponent(format!("exponent {p} must be positive")));
        }
        Ok(Self { recip: p.recip() })
    }

    pub fn from_recip(recip: Rational) -> Result<Self> {
        if recip < Rational::zero() {
            return Err(Error::InvalidExponent(format!("reciprocal {recip} is negative")));
        }
        Ok(Self { recip })
    }

    pub fn from_f64(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Self::infinity());
        }
        let r = Rational::approximate_float(p)
            .ok_or_else(|| Error::InvalidExponent(format!("cannot represent exponent {p}")))?;
        Self::from_ratio(r)
    }

    pub fn recip(&self) -> Rational {
        self.recip
    }

    pub fn value(&self) -> Option<Rational> {
        (!self.recip.is_zero()).then(|| self.recip.recip())
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value().map_or(f64::INFINITY, |v| to_f64(&v))
    }

    /// Hölder conjugate `p′` with `1/p + 1/p′ = 1`.
    pub fn dual(&self) -> Result<Self> {
        Self::from_recip(Rational::one() - self.recip)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity") {
            return Ok(Self::infinity());
        }
        let bad = || Error::InvalidExponent(format!("cannot parse exponent `{s}`"));
        if let Some((a, b)) = t.split_once('/') {
            let a: i128 = a.trim().parse().map_err(|_| bad())?;
            let b: i128 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Self::from_ratio(q(a, b));
        }
        Self::from_f64(t.parse::<f64>().map_err(|_| bad())?)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => f.write_str("inf"),
            Some(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::from_f64(v),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Reading of the third admissibility line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdConditionMode {
    /// `1/4 ≤ p < 1/2 − 1/(3d)`, unsatisfiable for `p > 2`.
    AsWritten,
    /// `1/4 ≤ 1/p < 1/2 − 1/(3d)`.
    #[default]
    Reciprocal,
    Off,
}

impl FromStr for ThirdConditionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_written" => Ok(Self::AsWritten),
            "reciprocal" => Ok(Self::Reciprocal),
            "off" => Ok(Self::Off),
            other => Err(Error::InvalidExponent(format!("unknown third-condition mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    KleinGordon,
    Schrodinger,
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kg" | "klein_gordon" | "klein-gordon" => Ok(Self::KleinGordon),
            "schrodinger" | "schroedinger" => Ok(Self::Schrodinger),
            other => Err(Error::InvalidExponent(format!("unknown equation `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
            Self::IV => "IV",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleWitness {
    pub p: Exponent,
    pub r: Exponent,
    /// Auxiliary exponent with `1/β + 2/r = 1`.
    pub beta: Exponent,
    /// Interpolation weight on the decay factor.
    #[serde(serialize_with = "ser_rational")]
    pub theta: Rational,
    pub case: CaseTag,
}

impl AdmissibleWitness {
    pub fn theta_f64(&self) -> f64 {
        to_f64(&self.theta)
    }
}

/// Verdict with the list of violated conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub equation: Equation,
    pub d: u32,
    pub p: Exponent,
    pub r: Exponent,
    pub mode: ThirdConditionMode,
    pub feasible: bool,
    pub witness: Option<AdmissibleWitness>,
    pub failures: Vec<String>,
}

/// `d(1/2 − 1/p)`.
pub fn decay_rate(d: u32, p: Exponent) -> Rational {
    Rational::from_integer(d as i128) * (q(1, 2) - p.recip())
}

/// `2σ(p) = (d + 2)(1/2 − 1/p)`.
pub fn sigma_exponent(d: u32, p: Exponent) -> Result<Rational> {
    if p.recip() > q(1, 2) {
        return Err(Error::InvalidExponent(format!("2σ(p) needs p ≥ 2, got {p}")));
    }
    Ok(Rational::from_integer(d as i128 + 2) * (q(1, 2) - p.recip()))
}

fn third_condition(d: u32, p: Exponent, mode: ThirdConditionMode) -> Option<String> {
    let upper = q(1, 2) - q(1, 3 * d as i128);
    let lower = q(1, 4);
    match mode {
        ThirdConditionMode::Off => None,
        ThirdConditionMode::Reciprocal => {
            let x = p.recip();
            (!(lower <= x && x < upper)).then(|| format!("1/4 <= 1/p < {upper} fails for 1/p = {x}"))
        }
        ThirdConditionMode::AsWritten => {
            let ok = p.value().is_some_and(|v| lower <= v && v < upper);
            (!ok).then(|| format!("1/4 <= p < {upper} fails for p = {p}"))
        }
    }
}

fn check_pre(d: u32, p: Exponent, r: Exponent) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidExponent("dimension must be at least 1".into()));
    }
    if p.recip() >= q(1, 2) {
        return Err(Error::InvalidExponent(format!("p = {p} must exceed 2")));
    }
    if r.recip() > Rational::one() {
        return Err(Error::InvalidExponent(format!("r = {r} must be at least 1")));
    }
    Ok(())
}

/// Full admissibility decision for either equation.
pub fn admissibility(
    equation: Equation,
    d: u32,
    p: Exponent,
    r: Exponent,
    mode: ThirdConditionMode,
) -> Result<AdmissibilityReport> {
    check_pre(d, p, r)?;
    let inv_beta = Rational::one() - Rational::from_integer(2) * r.recip();
    let rate = decay_rate(d, p);
    let cap = match equation {
        Equation::KleinGordon => q(d as i128, d as i128 + 2),
        Equation::Schrodinger => Rational::one(),
    };
    let upper = cap.min(rate);
    let mut failures = Vec::new();
    if inv_beta < q(1, 3) {
        failures.push(format!("1/beta = {inv_beta} is below 1/3"));
    }
    if inv_beta > upper {
        failures.push(format!("1/beta = {inv_beta} exceeds {upper}"));
    }
    if let Some(msg) = third_condition(d, p, mode) {
        failures.push(msg);
    }
    let excluded = equation == Equation::Schrodinger
        && d > 2
        && r.is_infinite()
        && p.recip() == q(d as i128 - 2, 2 * d as i128);
    if excluded {
        failures.push("(p, r) = (2d/(d-2), inf) is excluded".into());
    }
    let witness = if failures.is_empty() {
        let beta = Exponent::from_recip(inv_beta)?;
        let (case, theta) = match equation {
            Equation::KleinGordon => kg_case(d, p, inv_beta, rate, upper),
            Equation::Schrodinger => (schrodinger_case(inv_beta, rate, upper), Rational::one()),
        };
        Some(AdmissibleWitness { p, r, beta, theta, case })
    } else {
        None
    };
    Ok(AdmissibilityReport {
        equation,
        d,
        p,
        r,
        mode,
        feasible: witness.is_some(),
        witness,
        failures,
    })
}

fn kg_case(d: u32, p: Exponent, inv_beta: Rational, rate: Rational, upper: Rational) -> (CaseTag, Rational) {
    if inv_beta == upper {
        return (CaseTag::I, upper / rate);
    }
    // θ·rate must lie in (1/β, upper], with θ ≤ 1 and θ·2σ(p) ≤ 1.
    let two_sigma = Rational::from_integer(d as i128 + 2) * (q(1, 2) - p.recip());
    let hi = (upper / rate).min(Rational::one()).min(two_sigma.recip());
    let lo = inv_beta / rate;
    (CaseTag::II, (lo + hi) / Rational::from_integer(2))
}

fn schrodinger_case(inv_beta: Rational, rate: Rational, upper: Rational) -> CaseTag {
    if inv_beta < upper {
        CaseTag::I
    } else if rate > Rational::one() {
        CaseTag::II
    } else if rate < Rational::one() {
        CaseTag::III
    } else {
        CaseTag::IV
    }
}

pub fn kg_admissible(
    d: u32,
    p: Exponent,
    r: Exponent,
    mode: ThirdConditionMode,
) -> Result<Option<AdmissibleWitness>> {
    Ok(admissibility(Equation::KleinGordon, d, p, r, mode)?.witness)
}

pub fn schrodinger_admissible(
    d: u32,
    p: Exponent,
    r: Exponent,
    mode: ThirdConditionMode,
) -> Result<Option<AdmissibleWitness>> {
    Ok(admissibility(Equation::Schrodinger, d, p, r, mode)?.witness)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaInfo {
    #[serde(serialize_with = "ser_rational")]
    pub gamma: Rational,
    pub gamma_f64: f64,
    /// Whether `γ/d > 1/2`.
    pub above_half: bool,
    /// Whether `2 < p < 3`.
    pub in_global_range: bool,
}

/// `γ` solving `1/p + γ/d − 1 = 1/(2p′)`.
pub fn gamma_from_p(d: u32, p: Exponent, override_range: bool) -> Result<GammaInfo> {
    if d == 0 {
        return Err(Error::InvalidExponent("dimension must be at least 1".into()));
    }
    let in_range = p.recip() > q(1, 3) && p.recip() < q(1, 2);
    if !in_range && !override_range {
        return Err(Error::InvalidExponent(format!("p = {p} lies outside (2, 3)")));
    }
    let dd = Rational::from_integer(d as i128);
    let dual_recip = Rational::one() - p.recip();
    let gamma = dd * (Rational::one() + dual_recip / Rational::from_integer(2) - p.recip());
    let gamma_f64 = to_f64(&gamma);
    if !(gamma > Rational::zero() && gamma < dd) {
        return Err(Error::InfeasibleGamma { gamma: gamma_f64, dim: d as usize });
    }
    Ok(GammaInfo { gamma, gamma_f64, above_half: gamma / dd > q(1, 2), in_global_range: in_range })
}

/// Smoothness exponent in the embedding test, kept exact.
pub fn smoothness(s: f64) -> Result<Rational> {
    Rational::approximate_float(s)
        .ok_or_else(|| Error::InvalidExponent(format!("cannot represent smoothness {s}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingQuery {
    pub p: Exponent,
    pub q: Exponent,
    #[serde(serialize_with = "ser_rational")]
    pub s1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub s2: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingCase {
    /// `q ≥ p > 1`, non-strict.
    LargeQ,
    /// `p > q`, strict.
    SmallQ,
    /// `p = 1`, `q = ∞`, non-strict.
    EndpointInfinity,
    /// `p = 1`, `q < ∞`, strict.
    EndpointFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingVerdict {
    pub holds: bool,
    #[serde(serialize_with = "ser_rational")]
    pub tau: Rational,
    pub case: EmbeddingCase,
    /// `s₁ − s₂ − τ`.
    #[serde(serialize_with = "ser_rational")]
    pub margin: Rational,
}

/// `τ(p, q) = max{0, d(1/q − 1/p), d(1/q + 1/p − 1)}`.
pub fn tau(d: u32, p: Exponent, q_exp: Exponent) -> Rational {
    let dd = Rational::from_integer(d as i128);
    let a = dd * (q_exp.recip() - p.recip());
    let b = dd * (q_exp.recip() + p.recip() - Rational::one());
    Rational::zero().max(a).max(b)
}

/// Decides `L^p_{s₁} ⊂ M^{p,q}_{s₂}`.
pub fn embedding_check(d: u32, query: &EmbeddingQuery) -> Result<EmbeddingVerdict> {
    let one = Rational::one();
    for (name, e) in [("p", query.p), ("q", query.q)] {
        if e.recip() > one {
            return Err(Error::InvalidExponent(format!("{name} = {e} must lie in [1, inf]")));
        }
    }
    let t = tau(d, query.p, query.q);
    let margin = query.s1 - query.s2 - t;
    let p_is_one = query.p.recip() == one;
    // Larger exponent means smaller reciprocal.
    let case = if p_is_one {
        if query.q.is_infinite() {
            EmbeddingCase::EndpointInfinity
        } else {
            EmbeddingCase::EndpointFinite
        }
    } else if query.q.recip() <= query.p.recip() {
        EmbeddingCase::LargeQ
    } else {
        EmbeddingCase::SmallQ
    };
    let holds = match case {
        EmbeddingCase::LargeQ | EmbeddingCase::EndpointInfinity => margin >= Rational::zero(),
        EmbeddingCase::SmallQ | EmbeddingCase::EndpointFinite => margin > Rational::zero(),
    };
    Ok(EmbeddingVerdict { holds, tau: t, case, margin })
}

/// One row of the admissible-region scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub d: u32,
    pub p: Exponent,
    pub r: Exponent,
    pub feasible: bool,
    pub case: Option<CaseTag>,
}

impl RegionRow {
    pub const CSV_HEADER: &'static str = "d,p,r,feasible,case_tag";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.d,
            self.p,
            self.r,
            self.feasible,
            self.case.map_or(String::new(), |c| c.to_string())
        )
    }
}

/// Scans `p = 2 + i/steps` (exclusive of 2) and `r = 1 + j` up to `r_max`.
pub fn region_scan(
    equation: Equation,
    d: u32,
    p_max: Rational,
    p_steps: u32,
    r_values: &[Exponent],
    mode: ThirdConditionMode,
) -> Result<Vec<RegionRow>> {
    let two = Rational::from_integer(2);
    let mut rows = Vec::new();
    for i in 1..=p_steps {
        let p = Exponent::from_ratio(two + (p_max - two) * q(i as i128, p_steps as i128))?;
        for &r in r_values {
            let rep = admissibility(equation, d, p, r, mode)?;
            rows.push(RegionRow {
                d,
                p,
                r,
                feasible: rep.feasible,
                case: rep.witness.map(|w| w.case),
            });
        }
    }
    Ok(rows)
}

/// `|a − b| ≤ tol` for callers mixing exact and floating inputs.
pub fn approx_eq(a: &Rational, b: f64, tol: f64) -> bool {
    (to_f64(a) - b).abs() <= tol
}

/// Exact value as `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    to_f64(r)
}

/// Sign-aware comparison helper for reports.
pub fn sign(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}
