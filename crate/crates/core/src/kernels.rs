//! Riesz and sampled convolution potentials and the Hartree nonlinearity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::{forward_in_place, inverse_in_place, GridSpec, SampledField, Space};

/// Value assigned to the `|ξ|^{γ-d}` symbol at `ξ = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModePolicy {
    Zero,
    /// Mean of the symbol over the frequency cell centred at the origin.
    #[default]
    BoxAverage,
}

/// `c_{d,γ} = π^{γ-d/2} Γ((d-γ)/2) / Γ(γ/2)`, so that `|x|^{-γ}` has
/// transform `c_{d,γ}|ξ|^{γ-d}`.
pub fn riesz_constant(dim: usize, gamma_exp: f64) -> f64 {
    let d = dim as f64;
    std::f64::consts::PI.powf(gamma_exp - 0.5 * d) * gamma(0.5 * (d - gamma_exp))
        / gamma(0.5 * gamma_exp)
}

fn check_gamma(dim: usize, gamma_exp: f64) -> Result<()> {
    if !(gamma_exp > 0.0 && gamma_exp < dim as f64) {
        return Err(Error::InvalidGamma { gamma: gamma_exp, dim });
    }
    Ok(())
}

/// Composite Simpson rule on `[-h, h]^m` for `m ∈ {0, 1, 2}`.
fn simpson_cube(m: usize, h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    const PANELS: usize = 400;
    let step = 2.0 * h / PANELS as f64;
    let weight = |i: usize| match i {
        0 | PANELS => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    match m {
        0 => f(&[]),
        1 => {
            let s: f64 = (0..=PANELS).map(|i| weight(i) * f(&[-h + i as f64 * step])).sum();
            s * step / 3.0
        }
        _ => {
            let mut s = 0.0;
            for i in 0..=PANELS {
                for j in 0..=PANELS {
                    s += weight(i) * weight(j) * f(&[-h + i as f64 * step, -h + j as f64 * step]);
                }
            }
            s * (step / 3.0).powi(2)
        }
    }
}

/// Mean of `c_{d,γ}|ξ|^{γ-d}` over the cube `[-Δξ/2, Δξ/2]^d`.
///
/// The cube splits into `2d` pyramids with apex at the origin; integrating
/// the radial direction exactly leaves a smooth integral over one face.
pub fn zero_mode_average(dim: usize, gamma_exp: f64, dxi: f64) -> Result<f64> {
    check_gamma(dim, gamma_exp)?;
    if dim > 3 {
        return Err(Error::InvalidGrid(format!("dimension {dim} exceeds 3")));
    }
    let c = riesz_constant(dim, gamma_exp);
    let h = 0.5 * dxi;
    let d = dim as f64;
    let integral = if dim == 1 {
        2.0 * h.powf(gamma_exp) / gamma_exp
    } else {
        let face = simpson_cube(dim - 1, h, |y| {
            let r2: f64 = h * h + y.iter().map(|v| v * v).sum::<f64>();
            r2.powf(0.5 * (gamma_exp - d))
        });
        2.0 * d * h / gamma_exp * face
    };
    Ok(c * integral / dxi.powi(dim as i32))
}

/// Symbol `λ c_{d,γ} |ξ|^{γ-d}` at every grid frequency in storage order.
pub fn riesz_multiplier(
    grid: &GridSpec,
    gamma_exp: f64,
    lambda: f64,
    zero_mode: ZeroModePolicy,
) -> Result<Vec<f64>> {
    let dim = grid.dim();
    check_gamma(dim, gamma_exp)?;
    if lambda == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let c = riesz_constant(dim, gamma_exp);
    let exponent = 0.5 * (gamma_exp - dim as f64);
    let mut symbol: Vec<f64> = grid
        .frequency_norms_sq()
        .into_iter()
        .map(|r2| if r2 > 0.0 { lambda * c * r2.powf(exponent) } else { 0.0 })
        .collect();
    symbol[0] = match zero_mode {
        ZeroModePolicy::Zero => 0.0,
        ZeroModePolicy::BoxAverage => lambda * zero_mode_average(dim, gamma_exp, grid.dxi())?,
    };
    Ok(symbol)
}

/// Convolution with `|x|^{-γ}`.
pub fn fractional_integral(
    f: &SampledField,
    gamma_exp: f64,
    zero_mode: ZeroModePolicy,
) -> Result<SampledField> {
    let symbol = riesz_multiplier(f.grid(), gamma_exp, 1.0, zero_mode)?;
    let mut spec = f.to_frequency().into_values();
    for (v, s) in spec.iter_mut().zip(&symbol) {
        *v *= s;
    }
    let out = SampledField::new(*f.grid(), spec, Space::Frequency)?;
    Ok(match f.space() {
        Space::Physical => out.to_physical(),
        Space::Frequency => out,
    })
}

/// Potential description, independent of any grid.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Riesz { lambda: f64, gamma: f64 },
    /// Real potential given by its physical samples.
    Sampled(SampledField),
}

/// `F(u) = (V ∗ |u|^{2k}) u` with the symbol of `V` cached on one grid.
#[derive(Clone, Debug)]
pub struct HartreeKernel {
    potential: PotentialSpec,
    power: u32,
    zero_mode: ZeroModePolicy,
    dealias: bool,
    grid: GridSpec,
    symbol: Vec<Complex64>,
}

impl HartreeKernel {
    pub fn riesz(
        grid: &GridSpec,
        lambda: f64,
        gamma_exp: f64,
        power: u32,
        zero_mode: ZeroModePolicy,
    ) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidPotential(format!("lambda = {lambda} is not finite")));
        }
        let symbol = riesz_multiplier(grid, gamma_exp, lambda, zero_mode)?
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        Self::build(PotentialSpec::Riesz { lambda, gamma: gamma_exp }, power, zero_mode, *grid, symbol)
    }

    pub fn sampled(potential: &SampledField, power: u32) -> Result<Self> {
        let phys = potential.to_physical();
        let worst = phys.values().iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if worst > 1e-12 {
            return Err(Error::InvalidPotential(format!(
                "potential has imaginary part up to {worst:e}"
            )));
        }
        let symbol = phys.to_frequency().into_values();
        Self::build(
            PotentialSpec::Sampled(phys),
            power,
            ZeroModePolicy::Zero,
            *potential.grid(),
            symbol,
        )
    }

    fn build(
        potential: PotentialSpec,
        power: u32,
        zero_mode: ZeroModePolicy,
        grid: GridSpec,
        symbol: Vec<Complex64>,
    ) -> Result<Self> {
        if power == 0 {
            return Err(Error::InvalidPotential("power k must be at least 1".into()));
        }
        Ok(Self { potential, power, zero_mode, dealias: false, grid, symbol })
    }

    /// Enables 2/3-rule truncation of `u` and of the output.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn zero_mode(&self) -> ZeroModePolicy {
        self.zero_mode
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn is_trivial(&self) -> bool {
        self.symbol.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    fn check(&self, u: &SampledField) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn truncate(&self, spec: &mut [Complex64]) {
        let n = self.grid.n();
        let cutoff = (n / 3) as i64;
        let dim = self.grid.dim();
        let mut idx = vec![0usize; dim];
        for (flat, v) in spec.iter_mut().enumerate() {
            self.grid.coords(flat, &mut idx);
            if idx.iter().any(|&j| self.grid.signed_index(j).abs() > cutoff) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Physical samples of `u`, truncated when dealiasing is on.
    fn prepared(&self, u: &SampledField) -> Vec<Complex64> {
        if !self.dealias {
            return u.to_physical().into_values();
        }
        let mut spec = u.to_frequency().into_values();
        self.truncate(&mut spec);
        inverse_in_place(&self.grid, &mut spec);
        spec
    }

    /// Real potential `V ∗ |u|^{2k}` sampled on the grid.
    pub fn potential_energy_density(&self, u: &SampledField) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(self.convolve_density(&self.prepared(u)))
    }

    fn convolve_density(&self, u: &[Complex64]) -> Vec<f64> {
        let k = self.power as i32;
        let mut buf: Vec<Complex64> =
            u.iter().map(|v| Complex64::new(v.norm_sqr().powi(k), 0.0)).collect();
        forward_in_place(&self.grid, &mut buf);
        for (v, s) in buf.iter_mut().zip(&self.symbol) {
            *v *= s;
        }
        inverse_in_place(&self.grid, &mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }

    /// `(V ∗ |u|^{2k}) u` in physical space.
    pub fn apply(&self, u: &SampledField) -> Result<SampledField> {
        self.check(u)?;
        let values = self.prepared(u);
        SampledField::new(self.grid, self.apply_prepared(values), Space::Physical)
    }

    fn apply_prepared(&self, values: Vec<Complex64>) -> Vec<Complex64> {
        let pot = self.convolve_density(&values);
        let mut out: Vec<Complex64> = values.iter().zip(&pot).map(|(v, p)| v * p).collect();
        if self.dealias {
            forward_in_place(&self.grid, &mut out);
            self.truncate(&mut out);
            inverse_in_place(&self.grid, &mut out);
        }
        out
    }

    /// Spectrum of `F(u)` from the spectrum of `u`.
    pub(crate) fn apply_spectrum(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut values = spectrum.to_vec();
        if self.dealias {
            self.truncate(&mut values);
        }
        inverse_in_place(&self.grid, &mut values);
        let mut out = self.apply_prepared(values);
        forward_in_place(&self.grid, &mut out);
        out
    }

    /// `V ∗ |u|^{2k}` from physical samples of `u`.
    pub(crate) fn potential_values(&self, physical: &[Complex64]) -> Vec<f64> {
        if !self.dealias {
            return self.convolve_density(physical);
        }
        let mut spec = physical.to_vec();
        forward_in_place(&self.grid, &mut spec);
        self.truncate(&mut spec);
        inverse_in_place(&self.grid, &mut spec);
        self.convolve_density(&spec)
    }
}

/// `F(u) = (V ∗ |u|^{2k}) u`.
pub fn hartree_nonlinearity(u: &SampledField, kernel: &HartreeKernel) -> Result<SampledField> {
    kernel.apply(u)
}
