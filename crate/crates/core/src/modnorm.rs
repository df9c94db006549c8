//! Frequency-uniform decomposition, modulation norms and Bessel potentials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    apply_multiplier, forward_in_place, inverse_in_place, japanese_bracket, lp_norm_values,
    GridSpec, SampledField,
};

/// Spectral mass fraction allowed outside the resolved band.
pub const ESCAPE_TOLERANCE: f64 = 1e-8;

/// Shape of the one-dimensional bump on the transition band `1/2 < r < 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionProfile {
    /// `h(1-r) / (h(1-r) + h(r-1/2))` with `h(t) = e^{-1/t}`.
    #[default]
    Smooth,
    /// Straight ramp from 1 at `r = 1/2` to 0 at `r = 1`.
    Linear,
}

impl TransitionProfile {
    pub fn bump(self, r: f64) -> f64 {
        let r = r.abs();
        if r <= 0.5 {
            return 1.0;
        }
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            Self::Smooth => {
                let h = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
                let a = h(1.0 - r);
                a / (a + h(r - 0.5))
            }
            Self::Linear => 2.0 * (1.0 - r),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoxWindow {
    pub index: Vec<i64>,
    /// `(flat frequency index, σ_k value)` over the support of `σ_k`.
    pub entries: Vec<(usize, f64)>,
}

/// The windows `σ_k = ρ_k / Σ_l ρ_l` for `|k|_∞ ≤ K_max`.
#[derive(Clone, Debug)]
pub struct WindowSystem {
    grid: GridSpec,
    profile: TransitionProfile,
    kmax: i64,
    boxes: Vec<BoxWindow>,
    lower_bound: f64,
    resolved: Vec<bool>,
}

/// Largest box index whose window fits below the Nyquist frequency.
pub fn max_box_index(grid: &GridSpec) -> i64 {
    (grid.n() as f64 / (2.0 * grid.length())).floor() as i64 - 1
}

pub fn build_windows(grid: &GridSpec, profile: TransitionProfile) -> Result<WindowSystem> {
    let kmax = max_box_index(grid);
    if kmax < 2 {
        return Err(Error::GridTooCoarse { kmax });
    }
    let n = grid.n();
    let freqs: Vec<f64> = (0..n).map(|j| grid.axis_frequency(j)).collect();
    // Σ_l ρ_l factorises over axes, so the windows do too.
    let denom: Vec<f64> = freqs
        .iter()
        .map(|&xi| {
            let c = xi.round() as i64;
            (c - 1..=c + 1).map(|l| profile.bump(xi - l as f64)).sum()
        })
        .collect();
    let mut axis_windows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut lower = f64::INFINITY;
    for k in -kmax..=kmax {
        let mut entries = Vec::new();
        for (j, &xi) in freqs.iter().enumerate() {
            let w = profile.bump(xi - k as f64) / denom[j];
            if w > 0.0 {
                entries.push((j, w));
            }
            if (xi - k as f64).abs() <= 0.5 {
                lower = lower.min(w);
            }
        }
        axis_windows.push(entries);
    }
    let dim = grid.dim();
    let side = (2 * kmax + 1) as usize;
    let mut boxes = Vec::with_capacity(side.pow(dim as u32));
    let mut pick = vec![0usize; dim];
    loop {
        let index: Vec<i64> = pick.iter().map(|&p| p as i64 - kmax).collect();
        let mut entries = vec![(0usize, 1.0f64)];
        for &p in &pick {
            let mut next = Vec::with_capacity(entries.len() * axis_windows[p].len());
            for &(flat, w) in &entries {
                for &(j, v) in &axis_windows[p] {
                    next.push((flat * n + j, w * v));
                }
            }
            entries = next;
        }
        boxes.push(BoxWindow { index, entries });
        let mut a = dim;
        loop {
            if a == 0 {
                let resolved = grid
                    .frequency_sup_norms()
                    .into_iter()
                    .map(|r| r <= (kmax - 1) as f64 + 1e-12)
                    .collect();
                return Ok(WindowSystem {
                    grid: *grid,
                    profile,
                    kmax,
                    boxes,
                    lower_bound: lower.powi(dim as i32),
                    resolved,
                });
            }
            a -= 1;
            pick[a] += 1;
            if pick[a] < side {
                break;
            }
            pick[a] = 0;
        }
    }
}

impl WindowSystem {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn profile(&self) -> TransitionProfile {
        self.profile
    }

    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    pub fn boxes(&self) -> &[BoxWindow] {
        &self.boxes
    }

    /// Realized `min σ_k` over the unit cubes `Q_k`.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Position of box `k` in [`Self::boxes`].
    pub fn box_position(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.grid.dim() || k.iter().any(|v| v.abs() > self.kmax) {
            return Err(Error::BoxOutOfRange { index: k.to_vec(), kmax: self.kmax });
        }
        let side = 2 * self.kmax + 1;
        Ok(k.iter().fold(0i64, |acc, &v| acc * side + v + self.kmax) as usize)
    }

    /// `Σ_k σ_k(ξ)` at every grid frequency.
    pub fn partition_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.grid.len()];
        for b in &self.boxes {
            for &(flat, w) in &b.entries {
                sum[flat] += w;
            }
        }
        sum
    }

    /// Largest `|Σ_k σ_k − 1|` over frequencies with `|ξ|_∞ ≤ K_max − 1`.
    pub fn partition_defect(&self) -> f64 {
        self.partition_sum()
            .iter()
            .zip(&self.resolved)
            .filter(|(_, &r)| r)
            .fold(0.0f64, |m, (s, _)| m.max((s - 1.0).abs()))
    }

    /// Whether the grid frequency at `flat` lies in the resolved band.
    pub fn is_resolved(&self, flat: usize) -> bool {
        self.resolved[flat]
    }

    /// Fraction of `Σ|f̂|²` sitting outside `|ξ|_∞ ≤ K_max − 1`.
    pub fn escaping_mass(&self, f: &SampledField) -> Result<f64> {
        self.check_grid(f)?;
        let spec = f.to_frequency();
        Ok(self.escaping_mass_spectrum(spec.values()))
    }

    fn escaping_mass_spectrum(&self, spec: &[Complex64]) -> f64 {
        let mut total = 0.0;
        let mut outside = 0.0;
        for (v, &r) in spec.iter().zip(&self.resolved) {
            let m = v.norm_sqr();
            total += m;
            if !r {
                outside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    fn check_grid(&self, f: &SampledField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn project_spectrum(&self, spec: &[Complex64], b: &BoxWindow) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
        for &(flat, w) in &b.entries {
            out[flat] = spec[flat] * w;
        }
        inverse_in_place(&self.grid, &mut out);
        out
    }
}

/// `□_k f = F^{-1} σ_k F f`, returned in physical space.
pub fn box_project(f: &SampledField, k: &[i64], ws: &WindowSystem) -> Result<SampledField> {
    ws.check_grid(f)?;
    let pos = ws.box_position(k)?;
    let spec = f.to_frequency();
    let values = ws.project_spectrum(spec.values(), &ws.boxes[pos]);
    SampledField::new(*f.grid(), values, crate::field::Space::Physical)
}

/// Every `□_k f` in the order of [`WindowSystem::boxes`].
pub fn decompose(f: &SampledField, ws: &WindowSystem) -> Result<Vec<SampledField>> {
    ws.check_grid(f)?;
    let spec = f.to_frequency();
    ws.boxes
        .iter()
        .map(|b| {
            SampledField::new(
                *f.grid(),
                ws.project_spectrum(spec.values(), b),
                crate::field::Space::Physical,
            )
        })
        .collect()
}

/// Exponents `(p, q, s)` of `M^{p,q}_s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub p: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub q: f64,
    #[serde(default)]
    pub s: f64,
}

impl NormSpec {
    pub fn new(p: f64, q: f64, s: f64) -> Result<Self> {
        let spec = Self { p, q, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::InvalidExponent(format!("p = {} must be >= 1", self.p)));
        }
        if self.q.is_nan() || self.q < 1.0 {
            return Err(Error::InvalidExponent(format!("q = {} must be >= 1", self.q)));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidExponent(format!("s = {} must be finite", self.s)));
        }
        Ok(())
    }
}

impl std::fmt::Display for NormSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "M^{{{},{}}}_{}",
            crate::serde_ext::fmt_exponent(self.p),
            crate::serde_ext::fmt_exponent(self.q),
            self.s
        )
    }
}

/// Weight `⟨k⟩^s = (1 + |k|²)^{s/2}`.
pub fn weight(k: &[i64], s: f64) -> f64 {
    let r2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
    (1.0 + r2).powf(0.5 * s)
}

/// Weighted `ℓ^q` combination of per-box norms.
fn combine_boxes(norms: &[f64], ws: &WindowSystem, q: f64, s: f64) -> f64 {
    if q.is_infinite() {
        return ws
            .boxes
            .iter()
            .zip(norms)
            .fold(0.0f64, |m, (b, &v)| m.max(v * weight(&b.index, s)));
    }
    let sum: f64 = ws
        .boxes
        .iter()
        .zip(norms)
        .map(|(b, &v)| (v * weight(&b.index, s)).powf(q))
        .sum();
    sum.powf(1.0 / q)
}

/// Per-box `‖□_k f‖_{L^p}` for several values of `p` at once.
fn box_lp_norms(spec: &[Complex64], ws: &WindowSystem, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    let grid = ws.grid;
    let needs_physical = ps.iter().any(|&p| p != 2.0);
    let mut out = vec![Vec::with_capacity(ws.boxes.len()); ps.len()];
    for b in &ws.boxes {
        let phys = if needs_physical { Some(ws.project_spectrum(spec, b)) } else { None };
        for (slot, &p) in out.iter_mut().zip(ps) {
            let v = if p == 2.0 {
                let s: f64 = b.entries.iter().map(|&(i, w)| (spec[i] * w).norm_sqr()).sum();
                (s * grid.freq_cell()).sqrt()
            } else {
                lp_norm_values(phys.as_ref().expect("physical projection"), p, grid.cell())?
            };
            slot.push(v);
        }
    }
    Ok(out)
}

/// Decomposition norm `(Σ_k ‖□_k f‖_p^q ⟨k⟩^{sq})^{1/q}`.
pub fn modulation_norm(f: &SampledField, spec: &NormSpec, ws: &WindowSystem) -> Result<f64> {
    Ok(modulation_norms(f, std::slice::from_ref(spec), ws)?[0])
}

/// Several decomposition norms of one field, sharing the box projections.
pub fn modulation_norms(f: &SampledField, specs: &[NormSpec], ws: &WindowSystem) -> Result<Vec<f64>> {
    ws.check_grid(f)?;
    let spectrum = f.to_frequency();
    modulation_norms_spectrum(spectrum.values(), specs, ws)
}

fn modulation_norms_spectrum(
    spectrum: &[Complex64],
    specs: &[NormSpec],
    ws: &WindowSystem,
) -> Result<Vec<f64>> {
    let escaping = ws.escaping_mass_spectrum(spectrum);
    if escaping > ESCAPE_TOLERANCE {
        return Err(Error::SpectrumNotResolved { escaping });
    }
    norms_without_gate(spectrum, specs, ws)
}

/// Norms of a spectrum without the resolved-spectrum check, for monitoring
/// runs whose spectra may broaden. Returns the norms and the escaping mass.
pub(crate) fn monitor_norms(
    spectrum: &[Complex64],
    specs: &[NormSpec],
    ws: &WindowSystem,
) -> Result<(Vec<f64>, f64)> {
    Ok((norms_without_gate(spectrum, specs, ws)?, ws.escaping_mass_spectrum(spectrum)))
}

fn norms_without_gate(spectrum: &[Complex64], specs: &[NormSpec], ws: &WindowSystem) -> Result<Vec<f64>> {
    for s in specs {
        s.validate()?;
    }
    let mut ps: Vec<f64> = Vec::new();
    for s in specs {
        if !ps.contains(&s.p) {
            ps.push(s.p);
        }
    }
    let per_p = box_lp_norms(spectrum, ws, &ps)?;
    Ok(specs
        .iter()
        .map(|s| {
            let idx = ps.iter().position(|&p| p == s.p).expect("p present");
            combine_boxes(&per_p[idx], ws, s.q, s.s)
        })
        .collect())
}

/// Window and lattice steps for the short-time Fourier transform norm.
#[derive(Clone, Debug)]
pub struct StftSpec {
    pub window: SampledField,
    pub a: f64,
    pub b: f64,
}

impl StftSpec {
    /// `L²`-normalized Gaussian `e^{-π|x|²}` with lattice steps `(a, b)`.
    pub fn gaussian(grid: &GridSpec, a: f64, b: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        let g = SampledField::from_fn(*grid, |x| {
            Complex64::new((-pi * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        })?;
        let norm = g.lp_norm(2.0)?;
        let spec = Self { window: g.scale(Complex64::new(1.0 / norm, 0.0)), a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.window.to_physical().lp_norm(2.0)?;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidLattice(format!("window L2 norm {norm} is not 1")));
        }
        if !(self.a > 0.0 && self.a <= 0.5 && self.b > 0.0 && self.b <= 0.5) {
            return Err(Error::InvalidLattice(format!(
                "steps a = {}, b = {} must lie in (0, 1/2]",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        Self { window: self.window.clone(), a: 0.5 * self.a, b: 0.5 * self.b }
    }
}

fn lattice_count(extent: f64, step: f64, what: &str) -> Result<usize> {
    let ratio = extent / step;
    let count = ratio.round();
    if count < 1.0 || (ratio - count).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidLattice(format!(
            "{what} step {step} does not divide {extent}"
        )));
    }
    Ok(count as usize)
}

/// STFT norm on one lattice, without the refinement check.
pub fn stft_norm_on_lattice(f: &SampledField, spec: &NormSpec, stft: &StftSpec) -> Result<f64> {
    spec.validate()?;
    stft.validate()?;
    let grid = *f.grid();
    if stft.window.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let dim = grid.dim();
    let len = grid.length();
    let nx = lattice_count(len, stft.a, "time")?;
    // Frequencies on the lattice are every `stride`-th grid frequency.
    let per_b = stft.b * len;
    let stride = per_b.round() as i64;
    if stride < 1 || (per_b - stride as f64).abs() > 1e-9 * per_b {
        return Err(Error::InvalidLattice(format!(
            "frequency step {} is not a multiple of 1/L",
            stft.b
        )));
    }
    let f_phys = f.to_physical();
    let g_spec = stft.window.to_frequency();
    let shift_cells = stft.a / grid.dx();
    let integral_shift = (shift_cells - shift_cells.round()).abs() < 1e-9;
    let g_phys = stft.window.to_physical();

    // Lattice frequencies in storage order with their weights.
    let mut y_flat = Vec::new();
    let mut y_weight = Vec::new();
    grid.for_each_frequency(|flat, xi| {
        let on = xi.iter().all(|&v| {
            let m = (v * len).round() as i64;
            m % stride == 0
        });
        if on {
            y_flat.push(flat);
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            y_weight.push((1.0 + r2).powf(0.5 * spec.s));
        }
    });
    let mut acc = vec![0.0f64; y_flat.len()];
    let pi = std::f64::consts::PI;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut pick = vec![0usize; dim];
    let mut centre = vec![0.0f64; dim];
    loop {
        for a in 0..dim {
            centre[a] = -0.5 * len + pick[a] as f64 * stft.a;
        }
        let shifted = if integral_shift {
            let cells: Vec<i64> = centre.iter().map(|c| (c / grid.dx()).round() as i64).collect();
            g_phys.roll(&cells)
        } else {
            apply_multiplier(&g_spec, |xi| {
                let dot: f64 = xi.iter().zip(&centre).map(|(u, v)| u * v).sum();
                Complex64::from_polar(1.0, -2.0 * pi * dot)
            })?
            .to_physical()
        };
        for ((o, fv), gv) in buf.iter_mut().zip(f_phys.values()).zip(shifted.values()) {
            *o = fv * gv.conj();
        }
        forward_in_place(&grid, &mut buf);
        for (slot, &flat) in acc.iter_mut().zip(&y_flat) {
            let m = buf[flat].norm();
            if spec.p.is_infinite() {
                *slot = slot.max(m);
            } else {
                *slot += m.powf(spec.p);
            }
        }
        let mut a = dim;
        let mut done = true;
        while a > 0 {
            a -= 1;
            pick[a] += 1;
            if pick[a] < nx {
                done = false;
                break;
            }
            pick[a] = 0;
        }
        if done {
            break;
        }
    }
    let cell_x = stft.a.powi(dim as i32);
    let cell_y = stft.b.powi(dim as i32);
    let inner: Vec<f64> = acc
        .iter()
        .map(|&v| if spec.p.is_infinite() { v } else { (v * cell_x).powf(1.0 / spec.p) })
        .collect();
    if spec.q.is_infinite() {
        return Ok(inner.iter().zip(&y_weight).fold(0.0f64, |m, (v, w)| m.max(v * w)));
    }
    let sum: f64 = inner.iter().zip(&y_weight).map(|(v, w)| (v * w).powf(spec.q)).sum();
    Ok((sum * cell_y).powf(1.0 / spec.q))
}

/// Relative change allowed when the STFT lattice steps are halved.
pub const LATTICE_TOLERANCE: f64 = 0.01;

/// STFT norm on the halved lattice, after checking it agrees with the
/// coarse lattice to within [`LATTICE_TOLERANCE`].
pub fn stft_norm(f: &SampledField, spec: &NormSpec, stft: &StftSpec) -> Result<f64> {
    let coarse = stft_norm_on_lattice(f, spec, stft)?;
    let fine = stft_norm_on_lattice(f, spec, &stft.halved())?;
    if fine == 0.0 && coarse == 0.0 {
        return Ok(0.0);
    }
    let change = (fine - coarse).abs() / fine.max(coarse);
    if change > LATTICE_TOLERANCE {
        return Err(Error::LatticeNotConverged { change });
    }
    Ok(fine)
}

/// `J_σ f` with symbol `⟨ξ⟩^σ = (1 + 4π²|ξ|²)^{σ/2}`.
pub fn bessel_potential(f: &SampledField, sigma: f64) -> Result<SampledField> {
    apply_multiplier(f, |xi| Complex64::new(japanese_bracket(xi).powf(sigma), 0.0))
}

/// One row of the norm CSV export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRecord {
    pub field_id: String,
    pub spec: NormSpec,
    pub convention: Convention,
    pub value: f64,
    pub escaping_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Decomposition,
    Stft,
}

impl NormRecord {
    pub const CSV_HEADER: &'static str = "field_id,p,q,s,convention,value,escaping_mass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.17e},{:.6e}",
            self.field_id,
            crate::serde_ext::fmt_exponent(self.spec.p),
            crate::serde_ext::fmt_exponent(self.spec.q),
            self.spec.s,
            match self.convention {
                Convention::Decomposition => "decomposition",
                Convention::Stft => "stft",
            },
            self.value,
            self.escaping_mass
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Space;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Random spectrum on `|ξ|_∞ ≤ band`.
    fn band_limited(grid: GridSpec, band: f64, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledField::from_spectrum_fn(grid, |xi| {
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if xi.iter().all(|v| v.abs() <= band) {
                a
            } else {
                c(0.0)
            }
        })
        .unwrap()
        .to_physical()
    }

    fn grid1() -> GridSpec {
        GridSpec::new(1, 256, 16.0).unwrap()
    }

    #[test]
    fn bump_profile_values() {
        for p in [TransitionProfile::Smooth, TransitionProfile::Linear] {
            assert_eq!(p.bump(0.0), 1.0);
            assert_eq!(p.bump(0.5), 1.0);
            assert_eq!(p.bump(1.0), 0.0);
            assert_eq!(p.bump(1.3), 0.0);
            let mid = p.bump(0.75);
            assert!(mid > 0.0 && mid < 1.0);
        }
        // Symmetric about r = 3/4.
        let s = TransitionProfile::Smooth;
        assert!((s.bump(0.6) + s.bump(0.9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_grid_partition() {
        let ws = build_windows(&grid1(), TransitionProfile::Smooth).unwrap();
        assert_eq!(ws.kmax(), 7);
        assert_eq!(ws.boxes().len(), 15);
        // Independent direct sum over every box at each resolved frequency.
        let g = grid1();
        let mut worst = 0.0f64;
        for j in 0..g.n() {
            let xi = g.axis_frequency(j);
            if xi.abs() > 6.0 {
                continue;
            }
            let mut total = 0.0;
            for k in -7i64..=7 {
                let num = TransitionProfile::Smooth.bump(xi - k as f64);
                let den: f64 = (-9i64..=9)
                    .map(|l| TransitionProfile::Smooth.bump(xi - l as f64))
                    .sum();
                total += num / den;
            }
            worst = worst.max((total - 1.0).abs());
        }
        assert!(worst <= 1e-12);
        assert!(ws.partition_defect() <= 1e-12);
    }

    #[test]
    fn origin_belongs_to_box_zero() {
        for g in [grid1(), GridSpec::new(2, 64, 8.0).unwrap()] {
            let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
            let zero = vec![0i64; g.dim()];
            let b = &ws.boxes()[ws.box_position(&zero).unwrap()];
            let w = b.entries.iter().find(|e| e.0 == 0).unwrap().1;
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn support_is_exact() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let k = 3i64;
        let b = &ws.boxes()[ws.box_position(&[k]).unwrap()];
        let target = g.frequency_flat(&[(k as f64 * 16.0 + 1.25 * 16.0) as i64]);
        assert!(b.entries.iter().all(|e| e.0 != target));
        for &(flat, _) in &b.entries {
            assert!((g.axis_frequency(flat) - k as f64).abs() < 1.0);
        }
    }

    #[test]
    fn lower_bound_recorded() {
        let ws = build_windows(&GridSpec::new(2, 64, 8.0).unwrap(), TransitionProfile::Smooth)
            .unwrap();
        assert!((ws.lower_bound() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = GridSpec::new(1, 8, 2.0).unwrap();
        assert!(matches!(
            build_windows(&g, TransitionProfile::Smooth),
            Err(Error::GridTooCoarse { kmax: 1 })
        ));
    }

    #[test]
    fn projection_of_single_mode() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let pi = std::f64::consts::PI;
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * pi * 2.0 * x[0]))
            .unwrap();
        let own = box_project(&f, &[2], &ws).unwrap();
        let diff = own.sub(&f).unwrap().max_abs();
        assert!(diff < 1e-12);
        for j in [-7i64, 0, 1, 3, 6] {
            assert!(box_project(&f, &[j], &ws).unwrap().max_abs() < 1e-12);
        }
        assert!(matches!(box_project(&f, &[8], &ws), Err(Error::BoxOutOfRange { .. })));
    }

    #[test]
    fn zero_field_projects_to_zero() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let z = SampledField::zeros(g);
        for piece in decompose(&z, &ws).unwrap() {
            assert_eq!(piece.max_abs(), 0.0);
        }
        let spec = NormSpec::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(modulation_norm(&z, &spec, &ws).unwrap(), 0.0);
    }

    #[test]
    fn projections_sum_to_field() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let f = band_limited(g, 5.5, 4);
        let mut total = SampledField::zeros(g);
        for piece in decompose(&f, &ws).unwrap() {
            total = total.add(&piece).unwrap();
        }
        let err = total.sub(&f).unwrap().lp_norm(2.0).unwrap() / f.lp_norm(2.0).unwrap();
        assert!(err < 1e-11);
    }

    #[test]
    fn almost_orthogonality() {
        let g = GridSpec::new(2, 64, 8.0).unwrap();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let f = band_limited(g, 1.8, 21);
        let norm = f.lp_norm(2.0).unwrap();
        let kmax = ws.kmax();
        for k in [[0i64, 0], [1, -1], [-2, 2]] {
            let bk = box_project(&f, &k, &ws).unwrap();
            let mut acc = SampledField::zeros(g);
            for l0 in -1..=1 {
                for l1 in -1..=1 {
                    let idx = [k[0] + l0, k[1] + l1];
                    if idx.iter().any(|v| v.abs() > kmax) {
                        continue;
                    }
                    acc = acc.add(&box_project(&bk, &idx, &ws).unwrap()).unwrap();
                }
            }
            let defect = acc.sub(&bk).unwrap().lp_norm(2.0).unwrap();
            assert!(defect <= 1e-11 * norm);
        }
    }

    #[test]
    fn single_box_norm() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let pi = std::f64::consts::PI;
        let k = 4.0;
        let f = SampledField::from_fn(g, |x| {
            Complex64::from_polar(1.0, 2.0 * pi * k * x[0]) * 0.7
        })
        .unwrap();
        for (p, s) in [(1.0, 0.5), (2.0, -1.0), (3.0, 2.0), (f64::INFINITY, 1.5)] {
            let spec = NormSpec::new(p, 1.0, s).unwrap();
            let expected = (1.0 + k * k).powf(0.5 * s) * f.lp_norm(p).unwrap();
            let got = modulation_norm(&f, &spec, &ws).unwrap();
            assert!((got - expected).abs() < 1e-12 * expected, "p={p}: {got} vs {expected}");
        }
    }

    #[test]
    fn unresolved_spectrum_reported() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let pi = std::f64::consts::PI;
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * pi * 7.0 * x[0]))
            .unwrap();
        let err = modulation_norm(&f, &NormSpec::new(2.0, 2.0, 0.0).unwrap(), &ws).unwrap_err();
        match err {
            Error::SpectrumNotResolved { escaping } => assert!((escaping - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn conjugation_invariance() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let f = band_limited(g, 5.0, 8);
        for spec in [NormSpec::new(2.0, 1.0, 0.5).unwrap(), NormSpec::new(3.0, 2.0, -0.5).unwrap()] {
            let a = modulation_norm(&f, &spec, &ws).unwrap();
            let b = modulation_norm(&f.conj().unwrap(), &spec, &ws).unwrap();
            assert!((a - b).abs() <= 1e-13 * a);
        }
    }

    #[test]
    fn l2_band_for_m22() {
        // Σ_k σ_k² lies in [1/2, 1] in one dimension, so the ratio does too.
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let spec = NormSpec::new(2.0, 2.0, 0.0).unwrap();
        for seed in 0..10 {
            let f = band_limited(g, 5.5, seed);
            let r = modulation_norm(&f, &spec, &ws).unwrap() / f.lp_norm(2.0).unwrap();
            assert!(r >= 0.5f64.sqrt() - 1e-12 && r <= 1.0 + 1e-12, "ratio {r}");
        }
    }

    #[test]
    fn stft_moyal_for_gaussian() {
        let g = grid1();
        let stft = StftSpec::gaussian(&g, 0.5, 0.5).unwrap();
        let pi = std::f64::consts::PI;
        let f = SampledField::from_fn(g, |x| c((-pi * 0.5 * x[0] * x[0]).exp())).unwrap();
        let spec = NormSpec::new(2.0, 2.0, 0.0).unwrap();
        let v = stft_norm(&f, &spec, &stft).unwrap();
        let expected = f.lp_norm(2.0).unwrap();
        assert!((v - expected).abs() < 0.02 * expected, "{v} vs {expected}");
        let zero = stft_norm(&SampledField::zeros(g), &spec, &stft).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn stft_tracks_modulation_shift() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let stft = StftSpec::gaussian(&g, 0.5, 0.5).unwrap();
        let spec = NormSpec::new(2.0, 1.0, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        let field = |m: f64| {
            SampledField::from_fn(g, |x| {
                Complex64::from_polar((-pi * x[0] * x[0]).exp(), 2.0 * pi * m * x[0])
            })
            .unwrap()
        };
        let base_s = stft_norm(&field(1.0), &spec, &stft).unwrap();
        let base_d = modulation_norm(&field(1.0), &spec, &ws).unwrap();
        for m in [2.0, 3.0, 4.0] {
            let gs = stft_norm(&field(m), &spec, &stft).unwrap() / base_s;
            let gd = modulation_norm(&field(m), &spec, &ws).unwrap() / base_d;
            assert!(gs > 1.0 && (gs / gd - 1.0).abs() < 0.10, "m={m}: {gs} vs {gd}");
        }
    }

    #[test]
    fn stft_rejects_bad_lattice() {
        let g = grid1();
        assert!(StftSpec::gaussian(&g, 0.75, 0.5).is_err());
        let stft = StftSpec { window: StftSpec::gaussian(&g, 0.5, 0.5).unwrap().window, a: 0.3, b: 0.5 };
        let f = band_limited(g, 3.0, 1);
        assert!(matches!(
            stft_norm_on_lattice(&f, &NormSpec::new(2.0, 2.0, 0.0).unwrap(), &stft),
            Err(Error::InvalidLattice(_))
        ));
    }

    #[test]
    fn bessel_potential_cases() {
        let g = grid1();
        let f = band_limited(g, 4.0, 2);
        let same = bessel_potential(&f, 0.0).unwrap();
        assert!(same.sub(&f).unwrap().max_abs() < 1e-12);
        let ones = SampledField::from_fn(g, |_| c(1.0)).unwrap();
        let j = bessel_potential(&ones, 1.7).unwrap();
        assert!(j.sub(&ones).unwrap().max_abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let xi0 = 2.5;
        let mode = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * pi * xi0 * x[0]))
            .unwrap();
        let scaled = bessel_potential(&mode, 2.0).unwrap();
        let factor = 1.0 + 4.0 * pi * pi * xi0 * xi0;
        let err = scaled.sub(&mode.scale(c(factor))).unwrap().max_abs();
        assert!(err < 1e-12 * factor);
        let back = bessel_potential(&bessel_potential(&f, 1.3).unwrap(), -1.3).unwrap();
        assert!(back.sub(&f).unwrap().max_abs() < 1e-11 * f.max_abs());
    }

    #[test]
    fn csv_row_format() {
        let r = NormRecord {
            field_id: "u0".into(),
            spec: NormSpec::new(2.0, f64::INFINITY, 0.5).unwrap(),
            convention: Convention::Decomposition,
            value: 1.5,
            escaping_mass: 0.0,
        };
        assert_eq!(r.csv_row(), "u0,2,inf,0.5,decomposition,1.50000000000000000e0,0.000000e0");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_properties(seed in any::<u64>(), p in 1.0f64..6.0, q in 1.0f64..4.0, s in -1.0f64..2.0,
                           re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let g = GridSpec::new(1, 128, 8.0).unwrap();
            let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
            let f = band_limited(g, 4.0, seed);
            let h = band_limited(g, 4.0, seed ^ 0x5555);
            let spec = NormSpec::new(p, q, s).unwrap();
            let nf = modulation_norm(&f, &spec, &ws).unwrap();
            let nh = modulation_norm(&h, &spec, &ws).unwrap();
            prop_assert!(nf > 0.0);
            let k = Complex64::new(re, im);
            let scaled = modulation_norm(&f.scale(k), &spec, &ws).unwrap();
            prop_assert!((scaled - k.norm() * nf).abs() <= 1e-10 * (k.norm() * nf).max(1e-300));
            let sum = modulation_norm(&f.add(&h).unwrap(), &spec, &ws).unwrap();
            prop_assert!(sum <= (nf + nh) * (1.0 + 1e-10));
            let wider = modulation_norm(&f, &NormSpec::new(p, q + 1.0, s).unwrap(), &ws).unwrap();
            prop_assert!(wider <= nf * (1.0 + 1e-12));
        }

        #[test]
        fn embedding_monotone_in_p(seed in any::<u64>()) {
            let g = GridSpec::new(1, 128, 8.0).unwrap();
            let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
            let f = band_limited(g, 4.0, seed);
            let small = modulation_norm(&f, &NormSpec::new(1.5, 1.0, 1.0).unwrap(), &ws).unwrap();
            let big = modulation_norm(&f, &NormSpec::new(4.0, 2.0, 0.0).unwrap(), &ws).unwrap();
            // Bernstein on boxes of side 2 bounds the L^p ratio by 2^{1/p1 - 1/p2}.
            prop_assert!(big <= small * 2f64.powf(1.0 / 1.5 - 0.25) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn physical_projection_space() {
        let g = grid1();
        let ws = build_windows(&g, TransitionProfile::Smooth).unwrap();
        let f = band_limited(g, 2.0, 3).to_frequency();
        assert_eq!(box_project(&f, &[0], &ws).unwrap().space(), Space::Physical);
    }
}
