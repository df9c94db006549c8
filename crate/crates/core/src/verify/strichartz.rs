//! Duhamel terms on synthetic space-time fields, integrated exactly in time
//! per Fourier mode against a forcing that is linear between mesh nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{corpus_scale, norm, EstimateSpec, NORM_FLOOR};
use crate::error::{Error, Result};
use crate::exponents::{admissibility, gamma_from_p, CaseTag, Equation, Exponent, Rational};
use crate::field::{GridSpec, SampledField, Space};
use crate::kernels::{hartree_nonlinearity, HartreeKernel, ZeroModePolicy};
use crate::modnorm::WindowSystem;
use crate::propagators::{frac_frequency, kg_frequency};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum StrichartzEquation {
    /// Kernel `sin(tω)/ω`, `ω = ⟨ξ⟩`.
    KleinGordon,
    /// Kernel `−i e^{it(2π|ξ|)^α}`.
    FracSchrodinger { alpha: f64 },
}

struct Params {
    equation: StrichartzEquation,
    p: Exponent,
    r: Exponent,
    s: f64,
    horizon: f64,
    dt: f64,
}

fn params(est: &EstimateSpec) -> Result<(Params, u32, crate::exponents::ThirdConditionMode)> {
    match *est {
        EstimateSpec::StrichartzKg { admissible_dim, p, r, s, horizon, dt, mode } => Ok((
            Params { equation: StrichartzEquation::KleinGordon, p, r, s, horizon, dt },
            admissible_dim,
            mode,
        )),
        EstimateSpec::StrichartzSchr { admissible_dim, p, r, s, alpha, horizon, dt, mode } => Ok((
            Params { equation: StrichartzEquation::FracSchrodinger { alpha }, p, r, s, horizon, dt },
            admissible_dim,
            mode,
        )),
        _ => Err(Error::NotApplicable(format!("`{}` is not a Strichartz check", est.id()))),
    }
}

fn mesh(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(horizon > 0.0 && dt > 0.0 && dt <= horizon && horizon.is_finite()) {
        return Err(Error::HypothesisViolated(format!(
            "need 0 < dt <= horizon, got dt = {dt}, horizon = {horizon}"
        )));
    }
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, horizon / steps as f64))
}

pub(super) fn check_hypotheses(est: &EstimateSpec, grid_dim: usize) -> Result<(CaseTag, Vec<String>)> {
    let (prm, adm_dim, mode) = params(est)?;
    let equation = match prm.equation {
        StrichartzEquation::KleinGordon => Equation::KleinGordon,
        StrichartzEquation::FracSchrodinger { alpha } => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::HypothesisViolated(format!("alpha = {alpha} must be positive")));
            }
            Equation::Schrodinger
        }
    };
    let report = admissibility(equation, adm_dim, prm.p, prm.r, mode)
        .map_err(|e| Error::HypothesisViolated(e.to_string()))?;
    let witness = match (report.feasible, report.witness) {
        (true, Some(w)) => w,
        _ => {
            return Err(Error::HypothesisViolated(format!(
                "(p, r) = ({}, {}) is not admissible in d = {adm_dim}: {}",
                prm.p,
                prm.r,
                report.failures.join("; ")
            )))
        }
    };
    gamma_from_p(grid_dim as u32, prm.p, false)
        .map_err(|e| Error::HypothesisViolated(e.to_string()))?;
    if !(prm.s >= 0.0) {
        return Err(Error::HypothesisViolated(format!("s = {} must be >= 0", prm.s)));
    }
    mesh(prm.horizon, prm.dt)?;
    let mut notes = Vec::new();
    if adm_dim as usize != grid_dim {
        notes.push(format!(
            "admissibility decided in d = {adm_dim}; fields evolve in d = {grid_dim} (override)"
        ));
    }
    Ok((witness.case, notes))
}

/// `(e^z − 1 − z)/z²` and `(e^z(z − 1) + 1)/z²`: weights of the left and
/// right node values for `∫₀¹ e^{zσ}(·) dσ` with linear interpolation.
fn node_weights(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let w0 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
        let w1 = 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0;
        return (w0, w1);
    }
    let ez = z.exp();
    ((ez - 1.0 - z) / (z * z), (ez * (z - 1.0) + 1.0) / (z * z))
}

/// One exponential branch `∫₀ᵗ e^{iω(t−τ)} F(τ) dτ` per mode.
struct Branch {
    omega: Vec<f64>,
    w0: Vec<Complex64>,
    w1: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Branch {
    fn new(omega: Vec<f64>, h: f64) -> Self {
        let (w0, w1) = omega.iter().map(|w| node_weights(Complex64::new(0.0, -w * h))).unzip();
        let acc = vec![Complex64::new(0.0, 0.0); omega.len()];
        Self { omega, w0, w1, acc }
    }

    fn push(&mut self, t_left: f64, h: f64, left: &[Complex64], right: &[Complex64]) {
        for m in 0..self.acc.len() {
            let phase = Complex64::from_polar(h, -self.omega[m] * t_left);
            self.acc[m] += phase * (self.w0[m] * left[m] + self.w1[m] * right[m]);
        }
    }

    fn value(&self, m: usize, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.omega[m] * t) * self.acc[m]
    }
}

/// Streams the Duhamel spectra at nodes `1..=steps`; node 0 is zero.
fn duhamel_stream(
    equation: StrichartzEquation,
    grid: &GridSpec,
    steps: usize,
    h: f64,
    mut forcing: impl FnMut(usize) -> Result<Vec<Complex64>>,
    mut visit: impl FnMut(usize, Vec<Complex64>) -> Result<()>,
) -> Result<()> {
    let omega = mode_frequencies(equation, grid);
    let mut branches = match equation {
        StrichartzEquation::KleinGordon => vec![
            Branch::new(omega.clone(), h),
            Branch::new(omega.iter().map(|w| -w).collect(), h),
        ],
        StrichartzEquation::FracSchrodinger { .. } => vec![Branch::new(omega.clone(), h)],
    };
    let mut left = forcing(0)?;
    for j in 0..steps {
        let right = forcing(j + 1)?;
        for b in &mut branches {
            b.push(j as f64 * h, h, &left, &right);
        }
        let t = (j + 1) as f64 * h;
        let out: Vec<Complex64> = (0..grid.len())
            .map(|m| match equation {
                StrichartzEquation::KleinGordon => {
                    (branches[0].value(m, t) - branches[1].value(m, t)) / (2.0 * I * omega[m])
                }
                StrichartzEquation::FracSchrodinger { .. } => -I * branches[0].value(m, t),
            })
            .collect();
        visit(j + 1, out)?;
        left = right;
    }
    Ok(())
}

/// Trapezoidal `L^r` norm of node values with spacing `h`.
fn time_norm(values: &[f64], h: f64, r: Exponent) -> f64 {
    if r.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    let rr = r.to_f64();
    let n = values.len();
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(j, v)| if j == 0 || j + 1 == n { 0.5 } else { 1.0 } * v.powf(rr))
        .sum();
    (sum * h).powf(1.0 / rr)
}

/// Time cutoff `sin²(πτ/T)` applied to the free evolution of each datum.
fn cutoff(t: f64, horizon: f64) -> f64 {
    (std::f64::consts::PI * t / horizon).sin().powi(2)
}

fn mode_frequencies(equation: StrichartzEquation, grid: &GridSpec) -> Vec<f64> {
    let mut omega = vec![0.0; grid.len()];
    match equation {
        StrichartzEquation::KleinGordon => {
            grid.for_each_frequency(|flat, xi| omega[flat] = kg_frequency(xi))
        }
        StrichartzEquation::FracSchrodinger { alpha } => {
            grid.for_each_frequency(|flat, xi| omega[flat] = frac_frequency(xi, alpha))
        }
    }
    omega
}

/// Ratios for samples `u(τ) = sin²(πτ/T)·e^{iτω(D)}f`, one per field.
pub(super) fn evaluate(
    est: &EstimateSpec,
    fields: &[SampledField],
    ws: &WindowSystem,
) -> Result<Vec<Option<f64>>> {
    let (prm, _, _) = params(est)?;
    let grid = *ws.grid();
    let gamma = gamma_from_p(grid.dim() as u32, prm.p, false)?.gamma_f64;
    let kernel = HartreeKernel::riesz(&grid, 1.0, gamma, 1, ZeroModePolicy::BoxAverage)?;
    let (steps, h) = mesh(prm.horizon, prm.dt)?;
    let one = Exponent::from_ratio(Rational::from_integer(1))?;
    let omega = mode_frequencies(prm.equation, &grid);
    let floor = NORM_FLOOR * corpus_scale(fields);
    let mut out = Vec::with_capacity(fields.len());
    for (j, f) in fields.iter().enumerate() {
        if f.spectral_l2() <= floor {
            out.push(None);
            continue;
        }
        let datum = f.to_frequency().into_values();
        let mut u_norms = Vec::with_capacity(steps + 1);
        let forcing = |n: usize| -> Result<Vec<Complex64>> {
            let t = n as f64 * h;
            let c = cutoff(t, prm.horizon);
            let spec = datum
                .iter()
                .zip(&omega)
                .map(|(v, w)| v * Complex64::from_polar(c, w * t))
                .collect();
            let u = SampledField::new(grid, spec, Space::Frequency)?.to_physical();
            u_norms.push(norm(&u, prm.p, one, prm.s, ws)?);
            Ok(hartree_nonlinearity(&u, &kernel)?.to_frequency().into_values())
        };
        let mut lhs_norms = vec![0.0];
        duhamel_stream(prm.equation, &grid, steps, h, forcing, |_, spec| {
            let f = SampledField::new(grid, spec, Space::Frequency)?;
            lhs_norms.push(norm(&f, prm.p, one, prm.s, ws)?);
            Ok(())
        })?;
        let rhs = time_norm(&u_norms, h, prm.r).powi(3);
        let lhs = time_norm(&lhs_norms, h, prm.r);
        if rhs <= 0.0 {
            out.push(None);
            continue;
        }
        let ratio = lhs / rhs;
        if !ratio.is_finite() {
            return Err(Error::NonFinite(format!("Strichartz ratio in sample {j}")));
        }
        out.push(Some(ratio));
    }
    Ok(out)
}

/// Largest relative gap between the streamed Duhamel integral and a
/// segment-by-segment ODE solution, for `u = a(τ)e^{2πiξ₀x}` with `|a|²a`
/// piecewise linear on the mesh.
pub fn single_mode_self_consistency(
    equation: StrichartzEquation,
    grid: &GridSpec,
    mode: i64,
    gamma: f64,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    if mode == 0 || grid.dim() != 1 || mode.unsigned_abs() as usize >= grid.n() / 2 {
        return Err(Error::InvalidField(format!("mode {mode} must be a nonzero 1-D grid mode")));
    }
    let (steps, h) = mesh(horizon, dt)?;
    let (a, b, c) = (steps / 4, steps / 2, 3 * steps / 4);
    if a == 0 || b == a || c == b {
        return Err(Error::InvalidField("mesh too coarse for the tent profile".into()));
    }
    let tent = |n: usize| -> f64 {
        if n <= a || n >= c {
            0.0
        } else if n <= b {
            (n - a) as f64 / (b - a) as f64
        } else {
            (c - n) as f64 / (c - b) as f64
        }
    };
    let kernel = HartreeKernel::riesz(grid, 1.0, gamma, 1, ZeroModePolicy::BoxAverage)?;
    let xi0 = mode as f64 / grid.length();
    let wave = SampledField::from_fn(*grid, |x| Complex64::from_polar(1.0, std::f64::consts::TAU * xi0 * x[0]))?;
    let flat = grid.frequency_flat(&[mode]);
    let base = hartree_nonlinearity(&wave, &kernel)?.to_frequency();
    let coefficient = base.values()[flat];

    let forcing = |n: usize| -> Result<Vec<Complex64>> {
        let amp = tent(n).cbrt();
        Ok(hartree_nonlinearity(&wave.scale(Complex64::new(amp, 0.0)), &kernel)?
            .to_frequency()
            .into_values())
    };
    let mut streamed = vec![Complex64::new(0.0, 0.0)];
    duhamel_stream(equation, grid, steps, h, forcing, |_, spec| {
        streamed.push(spec[flat]);
        Ok(())
    })?;

    let exact = segment_solution(equation, kg_or_frac(equation, xi0), steps, h, tent);
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.norm())) * coefficient.norm();
    let worst = streamed
        .iter()
        .zip(&exact)
        .fold(0.0f64, |m, (s, e)| m.max((s - coefficient * e).norm()));
    Ok(worst / scale)
}

fn kg_or_frac(equation: StrichartzEquation, xi0: f64) -> f64 {
    match equation {
        StrichartzEquation::KleinGordon => kg_frequency(&[xi0]),
        StrichartzEquation::FracSchrodinger { alpha } => frac_frequency(&[xi0], alpha),
    }
}

/// Node values of the scalar response to a forcing linear between nodes,
/// solving the mode ODE exactly on each segment.
fn segment_solution(
    equation: StrichartzEquation,
    omega: f64,
    steps: usize,
    h: f64,
    g: impl Fn(usize) -> f64,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    match equation {
        StrichartzEquation::KleinGordon => {
            // y'' + ω²y = g, y(0) = y'(0) = 0.
            let (mut y, mut v) = (0.0f64, 0.0f64);
            let w2 = omega * omega;
            let (sn, cs) = (omega * h).sin_cos();
            for j in 0..steps {
                let (g0, g1) = (g(j), g(j + 1));
                let slope = (g1 - g0) / h;
                let c = y - g0 / w2;
                let d = (v - slope / w2) / omega;
                y = g1 / w2 + c * cs + d * sn;
                v = slope / w2 - c * omega * sn + d * omega * cs;
                out.push(Complex64::new(y, 0.0));
            }
        }
        StrichartzEquation::FracSchrodinger { .. } => {
            // y' = iωy − i g, y(0) = 0.
            let mut y = Complex64::new(0.0, 0.0);
            let rot = Complex64::from_polar(1.0, omega * h);
            for j in 0..steps {
                let (g0, g1) = (g(j), g(j + 1));
                let slope = (g1 - g0) / h;
                let a0 = Complex64::new(g0 / omega, -slope / (omega * omega));
                let a1 = slope / omega;
                y = a0 + a1 * h + (y - a0) * rot;
                out.push(y);
            }
        }
    }
    out
}
