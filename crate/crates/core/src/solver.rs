//! Cauchy solvers: Picard iteration on the Duhamel forms, Strang splitting,
//! a blow-up monitor and scattering diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{inverse_in_place, GridSpec, SampledField, Space};
use crate::kernels::HartreeKernel;
use crate::modnorm::{build_windows, monitor_norms, NormSpec, TransitionProfile, WindowSystem};
use crate::propagators::{advance_mode, frac_frequency, kg_frequency, sinc_t, wave_frequency};

type Spectrum = Vec<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Number of consecutive steps the monitored norm must rise before a
/// threshold crossing counts as blow-up.
pub const BLOWUP_MONOTONE_STEPS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum EquationKind {
    /// `u_tt + (I − Δ)u + F(u) = 0`.
    Hnlkg,
    /// `u_tt − Δu + F(u) = 0`.
    Hnlw,
    /// `i u_t + (−Δ)^{α/2} u = F(u)`.
    Fhnls { alpha: f64 },
}

impl EquationKind {
    pub fn is_second_order(&self) -> bool {
        !matches!(self, Self::Fhnls { .. })
    }

    /// Per-mode dispersion: the phase rate for the Schrödinger family and
    /// `Ω` in `u_tt + Ω² u` otherwise.
    fn frequency(&self, xi: &[f64]) -> f64 {
        match self {
            Self::Hnlkg => kg_frequency(xi),
            Self::Hnlw => wave_frequency(xi),
            Self::Fhnls { alpha } => frac_frequency(xi, *alpha),
        }
    }

    fn frequencies(&self, grid: &GridSpec) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        grid.for_each_frequency(|flat, xi| out[flat] = self.frequency(xi));
        out
    }
}

#[derive(Clone, Debug)]
pub struct EquationSpec {
    pub kind: EquationKind,
    pub kernel: HartreeKernel,
    pub u0: SampledField,
    pub u1: Option<SampledField>,
}

impl EquationSpec {
    /// `allow_any_alpha` lifts the `1/2 < α ≤ 2` restriction.
    pub fn new(
        kind: EquationKind,
        kernel: HartreeKernel,
        u0: SampledField,
        u1: Option<SampledField>,
        allow_any_alpha: bool,
    ) -> Result<Self> {
        if let EquationKind::Fhnls { alpha } = kind {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidExponent(format!("alpha = {alpha} must be positive")));
            }
            if !allow_any_alpha && !(alpha > 0.5 && alpha <= 2.0) {
                return Err(Error::InvalidExponent(format!(
                    "alpha = {alpha} lies outside (1/2, 2]; set the override to run it"
                )));
            }
        }
        if kind.is_second_order() != u1.is_some() {
            return Err(Error::InvalidField(if kind.is_second_order() {
                "second-order equations need initial velocity u1".into()
            } else {
                "first-order equations take no initial velocity".into()
            }));
        }
        if u0.grid() != kernel.grid() || u1.as_ref().is_some_and(|v| v.grid() != u0.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { kind, kernel, u0, u1 })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u0.grid()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Picard,
    #[default]
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub horizon: f64,
    pub dt: f64,
    pub method: Method,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Restart Picard on windows of this length instead of the whole horizon.
    pub picard_window: Option<f64>,
    /// Blow-up level as a multiple of the initial monitored norm.
    pub blowup_factor: f64,
    pub tracked_norms: Vec<NormSpec>,
    pub snapshot_stride: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 0.01,
            method: Method::Strang,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            picard_window: None,
            blowup_factor: 1e6,
            tracked_norms: Vec::new(),
            snapshot_stride: 1,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("solve.horizon", format!("horizon {} must be positive", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("solve.dt", format!("dt {} must be positive", self.dt));
        }
        if self.dt > self.horizon {
            return bad("solve.dt", format!("dt {} exceeds horizon {}", self.dt, self.horizon));
        }
        if !(self.picard_tol > 0.0) {
            return bad("solve.picard_tol", "tolerance must be positive".into());
        }
        if self.picard_max_iter == 0 {
            return bad("solve.picard_max_iter", "must be at least 1".into());
        }
        if let Some(w) = self.picard_window {
            if !(w >= self.dt && w.is_finite()) {
                return bad("solve.picard_window", format!("window {w} must be at least dt"));
            }
        }
        if !(self.blowup_factor > 1.0) {
            return bad("solve.blowup_factor", "must exceed 1".into());
        }
        if self.snapshot_stride == 0 {
            return bad("solve.snapshot_stride", "must be at least 1".into());
        }
        for (i, n) in self.tracked_norms.iter().enumerate() {
            n.validate().map_err(|e| Error::Config {
                path: format!("solve.tracked_norms[{i}]"),
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Step count and the step that divides the horizon evenly.
    pub fn mesh(&self) -> (usize, f64) {
        let steps = (self.horizon / self.dt - 1e-9).ceil().max(1.0) as usize;
        (steps, self.horizon / steps as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    /// Tracked modulation norms, in configuration order.
    pub norms: Vec<f64>,
    pub mass: f64,
    pub energy: f64,
    /// Spectral mass fraction outside the resolved band.
    pub escaping: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupDetected { t: f64 },
    PicardDiverged,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// Sup-in-time increments `‖u_{n+1} − u_n‖`, maximised over tracked norms.
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub converged: bool,
    /// Number of restart windows used.
    pub windows: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<SampledField>,
    pub ut: Option<Vec<SampledField>>,
    pub diagnostics: Vec<Diagnostics>,
    pub convergence: Option<ConvergenceReport>,
    pub termination: Termination,
}

/// Whole-mesh path in frequency space.
#[derive(Clone, Debug)]
struct Path {
    u: Vec<Spectrum>,
    ut: Option<Vec<Spectrum>>,
}

/// Shared per-run data.
struct Context<'a> {
    eq: &'a EquationSpec,
    grid: GridSpec,
    omega: Vec<f64>,
    windows: WindowSystem,
    tracked: Vec<NormSpec>,
}

impl<'a> Context<'a> {
    fn new(eq: &'a EquationSpec, tracked: &[NormSpec]) -> Result<Self> {
        let grid = *eq.grid();
        let tracked = if tracked.is_empty() {
            vec![NormSpec { p: 2.0, q: 2.0, s: 0.0 }]
        } else {
            tracked.to_vec()
        };
        Ok(Self {
            eq,
            grid,
            omega: eq.kind.frequencies(&grid),
            windows: build_windows(&grid, TransitionProfile::Smooth)?,
            tracked,
        })
    }

    fn nonlinear(&self, u: &[Complex64]) -> Spectrum {
        if self.eq.kernel.is_trivial() {
            return vec![ZERO; u.len()];
        }
        self.eq.kernel.apply_spectrum(u)
    }

    fn initial(&self) -> (Spectrum, Option<Spectrum>) {
        (
            self.eq.u0.to_frequency().into_values(),
            self.eq.u1.as_ref().map(|v| v.to_frequency().into_values()),
        )
    }

    /// Exact linear flow of one state over time `t`.
    fn linear(&self, u: &mut [Complex64], ut: Option<&mut [Complex64]>, t: f64) {
        match ut {
            None => {
                for (v, w) in u.iter_mut().zip(&self.omega) {
                    *v *= Complex64::from_polar(1.0, t * w);
                }
            }
            Some(ut) => {
                for ((v, vt), w) in u.iter_mut().zip(ut.iter_mut()).zip(&self.omega) {
                    let (a, b) = advance_mode(*w, t, *v, *vt);
                    *v = a;
                    *vt = b;
                }
            }
        }
    }

    fn free_path(&self, u0: &[Complex64], u1: Option<&[Complex64]>, times: &[f64]) -> Path {
        let mut u = Vec::with_capacity(times.len());
        let mut ut = u1.map(|_| Vec::with_capacity(times.len()));
        for &t in times {
            let mut a = u0.to_vec();
            let mut b = u1.map(|v| v.to_vec());
            self.linear(&mut a, b.as_deref_mut(), t);
            u.push(a);
            if let (Some(store), Some(b)) = (ut.as_mut(), b) {
                store.push(b);
            }
        }
        Path { u, ut }
    }

    /// One application of the Duhamel map on a uniform mesh starting at 0.
    fn duhamel(&self, u0: &[Complex64], u1: Option<&[Complex64]>, times: &[f64], cand: &Path) -> Path {
        let mut out = self.free_path(u0, u1, times);
        if self.eq.kernel.is_trivial() {
            return out;
        }
        let len = u0.len();
        match &mut out.ut {
            None => {
                // û_j = U(t_j)(û0 − i I_j), I_j = ∫ U(−τ)F.
                let mut acc = vec![ZERO; len];
                let mut prev: Option<Spectrum> = None;
                for (j, &t) in times.iter().enumerate() {
                    let mut w = self.nonlinear(&cand.u[j]);
                    for (v, om) in w.iter_mut().zip(&self.omega) {
                        *v *= Complex64::from_polar(1.0, -t * om);
                    }
                    if let Some(p) = &prev {
                        let h = 0.5 * (t - times[j - 1]);
                        for ((a, x), y) in acc.iter_mut().zip(p).zip(&w) {
                            *a += (x + y) * h;
                        }
                    }
                    for ((v, a), om) in out.u[j].iter_mut().zip(&acc).zip(&self.omega) {
                        *v -= Complex64::i() * a * Complex64::from_polar(1.0, t * om);
                    }
                    prev = Some(w);
                }
            }
            Some(out_t) => {
                // K(t − τ) = a(t)b(τ) − c(t)e(τ) per mode.
                let mut big_b = vec![ZERO; len];
                let mut big_e = vec![ZERO; len];
                let mut prev: Option<(Spectrum, Spectrum)> = None;
                for (j, &t) in times.iter().enumerate() {
                    let f = self.nonlinear(&cand.u[j]);
                    let mut fb = Vec::with_capacity(len);
                    let mut fe = Vec::with_capacity(len);
                    for (v, &om) in f.iter().zip(&self.omega) {
                        if om == 0.0 {
                            fb.push(*v);
                            fe.push(*v * t);
                        } else {
                            let (s, c) = (t * om).sin_cos();
                            fb.push(*v * c);
                            fe.push(*v * s);
                        }
                    }
                    if let Some((pb, pe)) = &prev {
                        let h = 0.5 * (t - times[j - 1]);
                        for i in 0..len {
                            big_b[i] += (pb[i] + fb[i]) * h;
                            big_e[i] += (pe[i] + fe[i]) * h;
                        }
                    }
                    let u = &mut out.u[j];
                    let ut = &mut out_t[j];
                    for i in 0..len {
                        let om = self.omega[i];
                        if om == 0.0 {
                            u[i] -= big_b[i] * t - big_e[i];
                            ut[i] -= big_b[i];
                        } else {
                            let (s, c) = (t * om).sin_cos();
                            u[i] -= big_b[i] * sinc_t(t, om) - big_e[i] * (c / om);
                            ut[i] -= big_b[i] * c + big_e[i] * s;
                        }
                    }
                    prev = Some((fb, fe));
                }
            }
        }
        out
    }

    fn tracked_norms(&self, spectrum: &[Complex64]) -> Result<(Vec<f64>, f64)> {
        monitor_norms(spectrum, &self.tracked, &self.windows)
    }

    /// Largest tracked norm of `a − b`.
    fn difference_norm(&self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        let diff: Spectrum = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let (norms, _) = self.tracked_norms(&diff)?;
        Ok(norms.into_iter().fold(0.0, f64::max))
    }

    fn mass(&self, u: &[Complex64]) -> f64 {
        (u.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.freq_cell()).sqrt()
    }

    fn energy(&self, u: &[Complex64], ut: Option<&[Complex64]>) -> f64 {
        let cell = self.grid.freq_cell();
        let k = self.eq.kernel.power() as i32;
        let interaction = if self.eq.kernel.is_trivial() {
            0.0
        } else {
            let mut phys = u.to_vec();
            inverse_in_place(&self.grid, &mut phys);
            let pot = self.eq.kernel.potential_values(&phys);
            phys.iter().zip(&pot).map(|(v, p)| p * v.norm_sqr().powi(k)).sum::<f64>()
                * self.grid.cell()
        };
        match ut {
            None => {
                let quad: f64 = u.iter().zip(&self.omega).map(|(v, w)| w * v.norm_sqr()).sum();
                -quad * cell + 0.5 * interaction
            }
            Some(ut) => {
                let kinetic: f64 = ut
                    .iter()
                    .zip(u)
                    .zip(&self.omega)
                    .map(|((a, b), w)| a.norm_sqr() + w * w * b.norm_sqr())
                    .sum();
                0.5 * kinetic * cell + interaction / (4.0 * k as f64)
            }
        }
    }

    fn diagnostics(&self, t: f64, u: &[Complex64], ut: Option<&[Complex64]>) -> Result<Diagnostics> {
        let (norms, escaping) = self.tracked_norms(u)?;
        let mass = self.mass(u);
        let energy = self.energy(u, ut);
        if !norms.iter().all(|v| v.is_finite()) || !mass.is_finite() {
            return Err(Error::NonFinite(format!("non-finite diagnostics at t = {t}")));
        }
        Ok(Diagnostics { t, norms, mass, energy, escaping })
    }

    fn field(&self, spectrum: Spectrum) -> Result<SampledField> {
        Ok(SampledField::new(self.grid, spectrum, Space::Frequency)?.to_physical())
    }
}

fn uniform_mesh(steps: usize, dt: f64, t0: f64) -> Vec<f64> {
    (0..=steps).map(|j| t0 + j as f64 * dt).collect()
}

fn check_mesh(times: &[f64]) -> Result<f64> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::MeshMismatch);
    }
    let dt = times[1] - times[0];
    for (j, w) in times.windows(2).enumerate() {
        let expected = (j + 1) as f64 * dt;
        if !(w[1] > w[0]) || (w[1] - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::MeshMismatch);
        }
    }
    Ok(dt)
}

/// `J(candidate)`: free flow of the data plus the Duhamel integral of the
/// candidate's nonlinearity, by trapezoid on the candidate's mesh.
pub fn duhamel_map(candidate: &Trajectory, eq: &EquationSpec) -> Result<Trajectory> {
    check_mesh(&candidate.times)?;
    if candidate.u.iter().any(|f| f.grid() != eq.grid()) {
        return Err(Error::GridMismatch);
    }
    if eq.kind.is_second_order() && candidate.ut.is_none() {
        return Err(Error::MeshMismatch);
    }
    let ctx = Context::new(eq, &[])?;
    let cand = Path {
        u: candidate.u.iter().map(|f| f.to_frequency().into_values()).collect(),
        ut: None,
    };
    let (u0, u1) = ctx.initial();
    let path = ctx.duhamel(&u0, u1.as_deref(), &candidate.times, &cand);
    assemble(&ctx, &candidate.times, path, 1, None, Termination::Completed)
}

fn assemble(
    ctx: &Context,
    times: &[f64],
    path: Path,
    stride: usize,
    convergence: Option<ConvergenceReport>,
    termination: Termination,
) -> Result<Trajectory> {
    let last = times.len() - 1;
    let keep: Vec<usize> = (0..=last).filter(|j| j % stride == 0 || *j == last).collect();
    let mut out_t = Vec::new();
    let mut out_u = Vec::new();
    let mut out_ut = path.ut.as_ref().map(|_| Vec::new());
    let mut diags = Vec::new();
    let Path { u, ut } = path;
    let mut ut_iter = ut.map(|v| v.into_iter());
    for (j, spec) in u.into_iter().enumerate() {
        let spec_t = ut_iter.as_mut().and_then(|it| it.next());
        if !keep.contains(&j) {
            continue;
        }
        diags.push(ctx.diagnostics(times[j], &spec, spec_t.as_deref())?);
        out_t.push(times[j]);
        out_u.push(ctx.field(spec)?);
        if let (Some(store), Some(v)) = (out_ut.as_mut(), spec_t) {
            store.push(ctx.field(v)?);
        }
    }
    Ok(Trajectory {
        times: out_t,
        u: out_u,
        ut: out_ut,
        diagnostics: diags,
        convergence,
        termination,
    })
}

/// Iterates the Duhamel map from the free flow until the sup-in-time
/// increment falls below `picard_tol`.
pub fn picard_solve(eq: &EquationSpec, cfg: &SolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let ctx = Context::new(eq, &cfg.tracked_norms)?;
    let (steps, dt) = cfg.mesh();
    let window_steps = cfg
        .picard_window
        .map_or(steps, |w| ((w / dt + 1e-9).floor() as usize).clamp(1, steps));
    let (mut u0, mut u1) = ctx.initial();
    let mut report = ConvergenceReport { converged: true, ..Default::default() };
    let mut all_u: Vec<Spectrum> = Vec::with_capacity(steps + 1);
    let mut all_ut: Option<Vec<Spectrum>> = u1.as_ref().map(|_| Vec::with_capacity(steps + 1));
    let mut done = 0;
    while done < steps {
        let n = window_steps.min(steps - done);
        let local = uniform_mesh(n, dt, 0.0);
        let path = picard_window(&ctx, &u0, u1.as_deref(), &local, cfg, &mut report)?;
        report.windows += 1;
        let skip = usize::from(done > 0);
        u0 = path.u[n].clone();
        u1 = path.ut.as_ref().map(|v| v[n].clone());
        all_u.extend(path.u.into_iter().skip(skip));
        if let (Some(store), Some(v)) = (all_ut.as_mut(), path.ut) {
            store.extend(v.into_iter().skip(skip));
        }
        done += n;
    }
    let times = uniform_mesh(steps, dt, 0.0);
    assemble(
        &ctx,
        &times,
        Path { u: all_u, ut: all_ut },
        cfg.snapshot_stride,
        Some(report),
        Termination::Completed,
    )
}

fn picard_window(
    ctx: &Context,
    u0: &[Complex64],
    u1: Option<&[Complex64]>,
    times: &[f64],
    cfg: &SolveConfig,
    report: &mut ConvergenceReport,
) -> Result<Path> {
    let mut current = ctx.free_path(u0, u1, times);
    let mut rising = 0;
    let mut last: Option<f64> = None;
    for _ in 0..cfg.picard_max_iter {
        let next = ctx.duhamel(u0, u1, times, &current);
        let mut inc = 0.0f64;
        for (a, b) in next.u.iter().zip(&current.u) {
            let d = ctx.difference_norm(a, b)?;
            inc = if d.is_finite() { inc.max(d) } else { f64::INFINITY };
        }
        report.iterations += 1;
        report.increments.push(inc);
        if let Some(prev) = last {
            let ratio = if prev > 0.0 { inc / prev } else { f64::INFINITY };
            report.ratios.push(ratio);
            rising = if ratio >= 1.0 || !ratio.is_finite() { rising + 1 } else { 0 };
        }
        current = next;
        if inc < cfg.picard_tol {
            return Ok(current);
        }
        if rising >= 3 || !inc.is_finite() {
            break;
        }
        last = Some(inc);
    }
    report.converged = false;
    Err(Error::PicardDiverged { iterations: report.iterations, ratios: report.ratios.clone() })
}

/// Strang splitting: half linear step, full nonlinear step, half linear step.
pub fn evolve_strang(eq: &EquationSpec, cfg: &SolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let ctx = Context::new(eq, &cfg.tracked_norms)?;
    let (steps, dt) = cfg.mesh();
    let (mut u, mut ut) = ctx.initial();
    let first = ctx.diagnostics(0.0, &u, ut.as_deref())?;
    let threshold = cfg.blowup_factor * first.norms[0];
    let mut history = vec![first.norms[0]];
    let mut times = vec![0.0];
    let mut snaps_u = vec![ctx.field(u.clone())?];
    let mut snaps_ut = ut.as_ref().map(|v| ctx.field(v.clone()).map(|f| vec![f])).transpose()?;
    let mut diags = vec![first];
    let mut termination = Termination::Completed;
    for step in 1..=steps {
        let t = step as f64 * dt;
        strang_step(&ctx, &mut u, ut.as_deref_mut(), dt);
        let d = ctx.diagnostics(t, &u, ut.as_deref())?;
        history.push(d.norms[0]);
        let crossed = d.norms[0] > threshold && threshold > 0.0;
        let record = step % cfg.snapshot_stride == 0 || step == steps || crossed;
        if record {
            times.push(t);
            snaps_u.push(ctx.field(u.clone())?);
            if let (Some(store), Some(v)) = (snaps_ut.as_mut(), ut.as_ref()) {
                store.push(ctx.field(v.clone())?);
            }
            diags.push(d);
        }
        if crossed && rising_tail(&history, BLOWUP_MONOTONE_STEPS) {
            termination = Termination::BlowupDetected { t };
            break;
        }
    }
    Ok(Trajectory {
        times,
        u: snaps_u,
        ut: snaps_ut,
        diagnostics: diags,
        convergence: None,
        termination,
    })
}

/// Whether the last `n` values each exceed their predecessor.
fn rising_tail(history: &[f64], n: usize) -> bool {
    history.len() > n && history[history.len() - n - 1..].windows(2).all(|w| w[1] > w[0])
}

fn strang_step(ctx: &Context, u: &mut Spectrum, mut ut: Option<&mut [Complex64]>, dt: f64) {
    ctx.linear(u, ut.as_deref_mut(), 0.5 * dt);
    if !ctx.eq.kernel.is_trivial() {
        match ut.as_deref_mut() {
            None => {
                let mut phys = u.clone();
                inverse_in_place(&ctx.grid, &mut phys);
                let pot = ctx.eq.kernel.potential_values(&phys);
                for (v, p) in phys.iter_mut().zip(&pot) {
                    *v *= Complex64::from_polar(1.0, -dt * p);
                }
                crate::field::forward_in_place(&ctx.grid, &mut phys);
                *u = phys;
            }
            Some(vt) => {
                let f = ctx.nonlinear(u);
                for (a, b) in vt.iter_mut().zip(&f) {
                    *a -= b * dt;
                }
            }
        }
    }
    ctx.linear(u, ut, 0.5 * dt);
}

/// Dispatches on `cfg.method`.
pub fn solve(eq: &EquationSpec, cfg: &SolveConfig) -> Result<Trajectory> {
    match cfg.method {
        Method::Picard => picard_solve(eq, cfg),
        Method::Strang => evolve_strang(eq, cfg),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScatteringReport {
    /// Largest pairwise increment of the pulled-back profile on `t ≤ T/2`.
    pub early_increment: f64,
    /// Same on `t ≥ T/2`.
    pub late_increment: f64,
    pub residual_times: Vec<f64>,
    /// `‖u(t) − free flow of the limit‖` in the first tracked norm.
    pub residuals: Vec<f64>,
    pub residual_nonincreasing: bool,
    pub verdict: String,
    /// Limit profile(s): `u₊` for the Schrödinger family, `(v₁, v₂)` for
    /// Klein–Gordon.
    #[serde(skip)]
    pub limits: Vec<SampledField>,
}

/// Largest number of snapshots per half used for pairwise increments.
const PAIRWISE_SAMPLES: usize = 33;

/// Pull-back profiles, Cauchy increments and the residual to the free
/// evolution of the tail-averaged limit.
pub fn scattering_profile(
    traj: &Trajectory,
    eq: &EquationSpec,
    tracked: &[NormSpec],
) -> Result<ScatteringReport> {
    if traj.termination != Termination::Completed {
        return Err(Error::NotApplicable("trajectory did not complete".into()));
    }
    if matches!(eq.kind, EquationKind::Hnlw) {
        return Err(Error::NotApplicable("no scattering profile for the wave equation".into()));
    }
    let ctx = Context::new(eq, tracked)?;
    let n = traj.times.len();
    if n < 4 {
        return Err(Error::NotApplicable("too few snapshots".into()));
    }
    let horizon = traj.times[n - 1];
    // Profiles: one spectrum for Schrödinger, two for Klein–Gordon.
    let mut profiles: Vec<Vec<Spectrum>> = Vec::with_capacity(n);
    for j in 0..n {
        let t = traj.times[j];
        let u = traj.u[j].to_frequency().into_values();
        match &traj.ut {
            None => {
                let v = u
                    .iter()
                    .zip(&ctx.omega)
                    .map(|(x, w)| x * Complex64::from_polar(1.0, -t * w))
                    .collect();
                profiles.push(vec![v]);
            }
            Some(uts) => {
                let ut = uts[j].to_frequency().into_values();
                let mut v1 = Vec::with_capacity(u.len());
                let mut v2 = Vec::with_capacity(u.len());
                for ((x, y), &w) in u.iter().zip(&ut).zip(&ctx.omega) {
                    let q = y / (Complex64::i() * w);
                    v1.push((x + q) * 0.5 * Complex64::from_polar(1.0, -t * w));
                    v2.push((x - q) * 0.5 * Complex64::from_polar(1.0, t * w));
                }
                profiles.push(vec![v1, v2]);
            }
        }
    }
    let profile_distance = |a: &[Spectrum], b: &[Spectrum]| -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in a.iter().zip(b) {
            let diff: Spectrum = x.iter().zip(y).map(|(p, q)| p - q).collect();
            total += ctx.tracked_norms(&diff)?.0[0];
        }
        Ok(total)
    };
    let sample = |range: Vec<usize>| -> Vec<usize> {
        if range.len() <= PAIRWISE_SAMPLES {
            return range;
        }
        let m = range.len() - 1;
        (0..PAIRWISE_SAMPLES)
            .map(|i| range[i * m / (PAIRWISE_SAMPLES - 1)])
            .collect()
    };
    let half = 0.5 * horizon;
    let early = sample((0..n).filter(|&j| traj.times[j] <= half + 1e-12).collect());
    let late = sample((0..n).filter(|&j| traj.times[j] >= half - 1e-12).collect());
    let diameter = |idx: &[usize]| -> Result<f64> {
        let mut best = 0.0f64;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                best = best.max(profile_distance(&profiles[i], &profiles[j])?);
            }
        }
        Ok(best)
    };
    let early_increment = diameter(&early)?;
    let late_increment = diameter(&late)?;

    let tail: Vec<usize> = (0..n).filter(|&j| traj.times[j] >= 0.75 * horizon - 1e-12).collect();
    let parts = profiles[0].len();
    let mut limit: Vec<Spectrum> = vec![vec![ZERO; ctx.grid.len()]; parts];
    for &j in &tail {
        for (acc, v) in limit.iter_mut().zip(&profiles[j]) {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
    }
    let scale = 1.0 / tail.len() as f64;
    for part in &mut limit {
        for a in part.iter_mut() {
            *a *= scale;
        }
    }
    let mut residuals = Vec::with_capacity(tail.len());
    let mut residual_times = Vec::with_capacity(tail.len());
    for &j in &tail {
        let t = traj.times[j];
        let u = traj.u[j].to_frequency().into_values();
        let free: Spectrum = if parts == 1 {
            limit[0]
                .iter()
                .zip(&ctx.omega)
                .map(|(v, w)| v * Complex64::from_polar(1.0, t * w))
                .collect()
        } else {
            limit[0]
                .iter()
                .zip(&limit[1])
                .zip(&ctx.omega)
                .map(|((a, b), w)| a * Complex64::from_polar(1.0, t * w) + b * Complex64::from_polar(1.0, -t * w))
                .collect()
        };
        residuals.push(ctx.difference_norm(&u, &free)?);
        residual_times.push(t);
    }
    let floor = 1e-12 * residuals.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let residual_nonincreasing = residuals.windows(2).all(|w| w[1] <= w[0] + floor);
    let cauchy = late_increment * 5.0 <= early_increment || early_increment == 0.0;
    let verdict = if residual_nonincreasing && cauchy { "scattering-consistent" } else { "inconclusive" };
    Ok(ScatteringReport {
        early_increment,
        late_increment,
        residual_times,
        residuals,
        residual_nonincreasing,
        verdict: verdict.into(),
        limits: limit.into_iter().map(|s| ctx.field(s)).collect::<Result<_>>()?,
    })
}
