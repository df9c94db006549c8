//! Periodic grids standing in for `R^d`, sampled fields on them, and the
//! scaled discrete Fourier transform.
//!
//! The transform uses the cycle convention `f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx`.
//! Samples sit at `x_j = -L/2 + j·L/N` and frequencies at `ξ_m = m/L` with
//! `m` stored in FFT order (`0..N/2-1`, then `-N/2..-1`). The forward sum is
//! scaled by `Δx^d` and the inverse by `Δξ^d`, so Plancherel holds exactly.

mod fft;
pub mod snapshot;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{forward_in_place, inverse_in_place};

/// Transform convention recorded in every artifact.
pub const FOURIER_CONVENTION: &str = "fhat(xi) = int f(x) exp(-2 pi i x.xi) dx; x_j = -L/2 + j L/N";

/// Upper bound on `N^d` accepted by [`GridSpec::new`].
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    dim: usize,
    n: usize,
    length: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Self::new(raw.dim, raw.n, raw.length)
    }
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} is not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("side length {length} must be positive")));
        }
        match n.checked_pow(dim as u32) {
            Some(total) if total <= MAX_POINTS => {}
            _ => {
                return Err(Error::InvalidGrid(format!(
                    "{n}^{dim} points exceed the budget of {MAX_POINTS}"
                )))
            }
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        1.0 / self.length
    }

    /// Largest frequency magnitude per axis, `N/(2L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.length)
    }

    /// Cell volume in physical space.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Cell volume in frequency space.
    pub fn freq_cell(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    /// Signed frequency index of position `j` along one axis.
    pub fn signed_index(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    pub fn axis_frequency(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 / self.length
    }

    pub fn axis_position(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    /// Per-axis positions of a flat index; axis 0 varies slowest.
    pub fn coords(&self, flat: usize, out: &mut [usize]) {
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.n;
            rest /= self.n;
        }
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    /// Flat index of the grid frequency with the given signed indices.
    pub fn frequency_flat(&self, signed: &[i64]) -> usize {
        let n = self.n as i64;
        signed
            .iter()
            .fold(0usize, |acc, &m| acc * self.n + m.rem_euclid(n) as usize)
    }

    /// Calls `visit(flat, ξ)` for every grid frequency in storage order.
    pub fn for_each_frequency(&self, mut visit: impl FnMut(usize, &[f64])) {
        let axis: Vec<f64> = (0..self.n).map(|j| self.axis_frequency(j)).collect();
        self.walk(&axis, &mut visit);
    }

    /// Calls `visit(flat, x)` for every sample position in storage order.
    pub fn for_each_position(&self, mut visit: impl FnMut(usize, &[f64])) {
        let axis: Vec<f64> = (0..self.n).map(|j| self.axis_position(j)).collect();
        self.walk(&axis, &mut visit);
    }

    fn walk(&self, axis: &[f64], visit: &mut impl FnMut(usize, &[f64])) {
        let mut idx = [0usize; 3];
        let mut point = [axis[0]; 3];
        for flat in 0..self.len() {
            visit(flat, &point[..self.dim]);
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < self.n {
                    point[a] = axis[idx[a]];
                    break;
                }
                idx[a] = 0;
                point[a] = axis[0];
            }
        }
    }

    /// Sup-norm of the frequency at every flat index.
    pub fn frequency_sup_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_frequency(|flat, xi| {
            out[flat] = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        });
        out
    }

    /// Squared Euclidean frequency magnitude at every flat index.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_frequency(|flat, xi| {
            out[flat] = xi.iter().map(|v| v * v).sum();
        });
        out
    }

    /// Same side length, twice the points per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.n * 2, self.length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Physical,
    Frequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    space: Space,
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(i) => Err(Error::InvalidField(format!("non-finite value at index {i}"))),
        None => Ok(()),
    }
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values, space })
    }

    pub(crate) fn from_parts(grid: GridSpec, values: Vec<Complex64>, space: Space) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, space }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.len()], Space::Physical)
    }

    /// Samples `f` at the grid positions.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_position(|flat, x| values[flat] = f(x));
        Self::new(grid, values, Space::Physical)
    }

    /// Builds a field from its spectrum `ĝ(ξ)` evaluated at grid frequencies.
    pub fn from_spectrum_fn(grid: GridSpec, mut g: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_frequency(|flat, xi| values[flat] = g(xi));
        Self::new(grid, values, Space::Frequency)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn transform(&self, direction: Direction) -> Result<Self> {
        check_finite(&self.values)?;
        let expected = match direction {
            Direction::Forward => Space::Physical,
            Direction::Inverse => Space::Frequency,
        };
        if self.space != expected {
            return Err(Error::InvalidField(format!(
                "{direction:?} transform needs a field in {expected:?} space"
            )));
        }
        let mut values = self.values.clone();
        match direction {
            Direction::Forward => forward_in_place(&self.grid, &mut values),
            Direction::Inverse => inverse_in_place(&self.grid, &mut values),
        }
        let space = match direction {
            Direction::Forward => Space::Frequency,
            Direction::Inverse => Space::Physical,
        };
        Ok(Self::from_parts(self.grid, values, space))
    }

    /// The same function represented in frequency space.
    pub fn to_frequency(&self) -> Self {
        match self.space {
            Space::Frequency => self.clone(),
            Space::Physical => {
                let mut values = self.values.clone();
                forward_in_place(&self.grid, &mut values);
                Self::from_parts(self.grid, values, Space::Frequency)
            }
        }
    }

    /// The same function represented in physical space.
    pub fn to_physical(&self) -> Self {
        match self.space {
            Space::Physical => self.clone(),
            Space::Frequency => {
                let mut values = self.values.clone();
                inverse_in_place(&self.grid, &mut values);
                Self::from_parts(self.grid, values, Space::Physical)
            }
        }
    }

    /// Discrete `L^p` norm `(Σ|f|^p Δx^d)^{1/p}`, or the max for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if self.space != Space::Physical {
            return Err(Error::InvalidField("lp_norm needs a physical-space field".into()));
        }
        lp_norm_values(&self.values, p, self.grid.cell())
    }

    /// `ℓ²(Δξ^d)` norm of the spectrum.
    pub fn spectral_l2(&self) -> f64 {
        let spec = self.to_frequency();
        let sum: f64 = spec.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.freq_cell()).sqrt()
    }

    /// Fraction of `∫|f|²` carried by points with some `|x_i| > (1/2 − shell)L`.
    pub fn boundary_fraction(&self, shell: f64) -> f64 {
        let phys = self.to_physical();
        let edge = (0.5 - shell) * self.grid.length();
        let (mut outer, mut total) = (0.0, 0.0);
        self.grid.for_each_position(|flat, x| {
            let m = phys.values[flat].norm_sqr();
            total += m;
            if x.iter().any(|v| v.abs() > edge) {
                outer += m;
            }
        });
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|v| v * c).collect(), self.space)
    }

    pub fn conj(&self) -> Result<Self> {
        let phys = self.to_physical();
        Ok(Self::from_parts(
            self.grid,
            phys.values.iter().map(|v| v.conj()).collect(),
            Space::Physical,
        ))
    }

    /// `a·self + b·other`, computed in the space of `self`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let other = match self.space {
            Space::Physical => other.to_physical(),
            Space::Frequency => other.to_frequency(),
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_parts(self.grid, values, self.space))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Pointwise product in physical space.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let a = self.to_physical();
        let b = other.to_physical();
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
        Ok(Self::from_parts(self.grid, values, Space::Physical))
    }

    /// Circular shift by whole grid cells along each axis.
    pub fn roll(&self, shift: &[i64]) -> Self {
        let phys = self.to_physical();
        let n = self.grid.n as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut c = [0usize; 3];
        let mut t = [0usize; 3];
        for (flat, v) in phys.values.iter().enumerate() {
            self.grid.coords(flat, &mut c);
            for a in 0..self.grid.dim {
                t[a] = (c[a] as i64 + shift[a]).rem_euclid(n) as usize;
            }
            out[self.grid.flat(&t[..self.grid.dim])] = *v;
        }
        Self::from_parts(self.grid, out, Space::Physical)
    }
}

pub(crate) fn lp_norm_values(values: &[Complex64], p: f64, cell: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(format!("p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.norm())));
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        return Ok((s * cell).sqrt());
    }
    let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((s * cell).powf(1.0 / p))
}

/// Applies the Fourier multiplier `m` and returns a field in the input's space.
pub fn apply_multiplier(
    f: &SampledField,
    mut m: impl FnMut(&[f64]) -> Complex64,
) -> Result<SampledField> {
    let spec = f.to_frequency();
    let mut values = spec.values;
    let mut bad: Option<Vec<f64>> = None;
    f.grid.for_each_frequency(|flat, xi| {
        if bad.is_some() {
            return;
        }
        let s = m(xi);
        if !(s.re.is_finite() && s.im.is_finite()) {
            bad = Some(xi.to_vec());
            return;
        }
        values[flat] *= s;
    });
    if let Some(xi) = bad {
        return Err(Error::SingularSymbol { xi });
    }
    let out = SampledField::from_parts(f.grid, values, Space::Frequency);
    Ok(match f.space {
        Space::Physical => out.to_physical(),
        Space::Frequency => out,
    })
}

/// Bessel bracket `⟨ξ⟩ = (1 + 4π²|ξ|²)^{1/2}` in cycle frequency.
pub fn japanese_bracket(xi: &[f64]) -> f64 {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    (1.0 + 4.0 * std::f64::consts::PI.powi(2) * r2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(grid: GridSpec, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SampledField::new(grid, values, Space::Physical).unwrap()
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 16, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0).is_err());
        assert!(GridSpec::new(1, 4, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 0.0).is_err());
        assert!(GridSpec::new(3, 1024, 1.0).is_err());
        let g = GridSpec::new(2, 32, 4.0).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.nyquist(), 4.0);
        assert_eq!(g.dx() * g.dxi() * 32.0, 1.0);
    }

    #[test]
    fn frequency_order_is_fft_order() {
        let g = GridSpec::new(1, 8, 2.0).unwrap();
        let f: Vec<f64> = (0..8).map(|j| g.axis_frequency(j)).collect();
        assert_eq!(f, vec![0.0, 0.5, 1.0, 1.5, -2.0, -1.5, -1.0, -0.5]);
        assert_eq!(g.frequency_flat(&[-1]), 7);
        assert_eq!(g.axis_position(4), 0.0);
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        let z = SampledField::zeros(g);
        let f = z.transform(Direction::Forward).unwrap();
        assert!(f.values().iter().all(|v| v.norm() == 0.0));
        let b = f.transform(Direction::Inverse).unwrap();
        assert!(b.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn roundtrip_random_fields() {
        for (dim, n) in [(1, 256), (2, 32), (3, 16)] {
            let g = GridSpec::new(dim, n, 3.0).unwrap();
            let f = random_field(g, 7 + dim as u64);
            let back = f
                .transform(Direction::Forward)
                .unwrap()
                .transform(Direction::Inverse)
                .unwrap();
            assert!(rel_err(back.values(), f.values()) < 1e-12);
        }
    }

    #[test]
    fn direction_must_match_space() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let f = random_field(g, 1);
        assert!(f.transform(Direction::Inverse).is_err());
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let mut v = vec![c(0.0, 0.0); 8];
        v[3] = c(f64::NAN, 0.0);
        assert!(matches!(
            SampledField::new(g, v, Space::Physical),
            Err(Error::InvalidField(_))
        ));
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        let g = GridSpec::new(1, 512, 32.0).unwrap();
        let pi = std::f64::consts::PI;
        let f = SampledField::from_fn(g, |x| c((-pi * x[0] * x[0]).exp(), 0.0)).unwrap();
        let spec = f.transform(Direction::Forward).unwrap();
        let mut worst = 0.0f64;
        g.for_each_frequency(|flat, xi| {
            let exact = (-pi * xi[0] * xi[0]).exp();
            worst = worst.max((spec.values()[flat] - c(exact, 0.0)).norm());
        });
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn gaussian_maps_to_gaussian_in_three_dimensions() {
        let g = GridSpec::new(3, 64, 8.0).unwrap();
        let pi = std::f64::consts::PI;
        let f = SampledField::from_fn(g, |x| {
            c((-pi * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        })
        .unwrap();
        let spec = f.to_frequency();
        let mut worst = 0.0f64;
        g.for_each_frequency(|flat, xi| {
            let exact = (-pi * xi.iter().map(|v| v * v).sum::<f64>()).exp();
            worst = worst.max((spec.values()[flat] - c(exact, 0.0)).norm());
        });
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn lp_norm_basics() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let zero = SampledField::zeros(g);
        assert_eq!(zero.lp_norm(3.0).unwrap(), 0.0);
        let ones = SampledField::from_fn(g, |_| c(1.0, 0.0)).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((ones.lp_norm(p).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(ones.lp_norm(0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn l2_norm_matches_direct_sum() {
        let g = GridSpec::new(2, 16, 2.5).unwrap();
        let f = random_field(g, 11);
        let mut direct = 0.0;
        for v in f.values() {
            direct += v.re * v.re + v.im * v.im;
        }
        let direct = (direct * (2.5f64 / 16.0).powi(2)).sqrt();
        assert!((f.lp_norm(2.0).unwrap() - direct).abs() <= 1e-14 * direct);
    }

    #[test]
    fn identity_multiplier() {
        let g = GridSpec::new(1, 64, 4.0).unwrap();
        let f = random_field(g, 3);
        let out = apply_multiplier(&f, |_| c(1.0, 0.0)).unwrap();
        assert!(rel_err(out.values(), f.values()) < 1e-12);
    }

    #[test]
    fn shift_multiplier_translates() {
        let g = GridSpec::new(1, 64, 8.0).unwrap();
        let pi = std::f64::consts::PI;
        let xi0 = 3.0 / 8.0;
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * pi * xi0 * x[0]))
            .unwrap();
        let a = 0.3;
        let out =
            apply_multiplier(&f, |xi| Complex64::from_polar(1.0, 2.0 * pi * xi[0] * a)).unwrap();
        let expected =
            SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * pi * xi0 * (x[0] + a)))
                .unwrap();
        assert!(rel_err(out.values(), expected.values()) < 1e-12);
    }

    #[test]
    fn bracket_squared_composes() {
        let g = GridSpec::new(2, 32, 4.0).unwrap();
        let f = random_field(g, 5);
        let once = apply_multiplier(&f, |xi| c(japanese_bracket(xi).powi(2), 0.0)).unwrap();
        let twice = apply_multiplier(
            &apply_multiplier(&f, |xi| c(japanese_bracket(xi), 0.0)).unwrap(),
            |xi| c(japanese_bracket(xi), 0.0),
        )
        .unwrap();
        assert!(rel_err(twice.values(), once.values()) < 1e-12);
    }

    #[test]
    fn singular_symbol_names_frequency() {
        let g = GridSpec::new(1, 16, 2.0).unwrap();
        let f = random_field(g, 2);
        let err = apply_multiplier(&f, |xi| c(1.0 / xi[0], 0.0)).unwrap_err();
        match err {
            Error::SingularSymbol { xi } => assert_eq!(xi, vec![0.0]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn boundary_fraction_separates_centred_and_edge_mass() {
        let grid = GridSpec::new(1, 256, 16.0).unwrap();
        let pi = std::f64::consts::PI;
        let centred = SampledField::from_fn(grid, |x| c((-pi * x[0] * x[0]).exp(), 0.0)).unwrap();
        assert!(centred.boundary_fraction(0.1) < 1e-30);
        let flat = SampledField::from_fn(grid, |_| c(1.0, 0.0)).unwrap();
        assert!((flat.boundary_fraction(0.1) - 0.2).abs() < 0.01);
        assert_eq!(SampledField::zeros(grid).boundary_fraction(0.1), 0.0);
    }

    #[test]
    fn roll_matches_phase_shift() {
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        let f = random_field(g, 9);
        let rolled = f.roll(&[3, -2]);
        let dx = g.dx();
        let pi = std::f64::consts::PI;
        let shifted = apply_multiplier(&f, |xi| {
            Complex64::from_polar(1.0, -2.0 * pi * (xi[0] * 3.0 * dx + xi[1] * -2.0 * dx))
        })
        .unwrap();
        assert!(rel_err(rolled.values(), shifted.values()) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn plancherel(seed in any::<u64>(), dim in 1usize..=3, len in 0.5f64..20.0) {
            let n = [128, 16, 8][dim - 1];
            let g = GridSpec::new(dim, n, len).unwrap();
            let f = random_field(g, seed);
            let phys = f.lp_norm(2.0).unwrap();
            let freq = f.spectral_l2();
            prop_assert!((phys - freq).abs() <= 1e-12 * phys);
        }

        #[test]
        fn transform_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let g = GridSpec::new(2, 16, 3.0).unwrap();
            let f = random_field(g, seed);
            let h = random_field(g, seed.wrapping_add(1));
            let (ca, cb) = (c(a, 0.5 * b), c(b, -a));
            let lhs = f.combine(ca, &h, cb).unwrap().to_frequency();
            let rhs = f.to_frequency().combine(ca, &h.to_frequency(), cb).unwrap();
            let scale = rhs.values().iter().map(|v| v.norm()).fold(1.0f64, f64::max);
            let err = lhs.values().iter().zip(rhs.values()).map(|(x, y)| (x - y).norm()).fold(0.0f64, f64::max);
            prop_assert!(err <= 1e-12 * scale);
        }

        #[test]
        fn multipliers_compose(seed in any::<u64>(), t in -3.0f64..3.0, s in -2.0f64..2.0) {
            let g = GridSpec::new(1, 64, 5.0).unwrap();
            let f = random_field(g, seed);
            let m1 = |xi: &[f64]| Complex64::from_polar(1.0, t * xi[0] * xi[0]);
            let m2 = |xi: &[f64]| c(japanese_bracket(xi).powf(s), 0.0);
            let seq = apply_multiplier(&apply_multiplier(&f, m1).unwrap(), m2).unwrap();
            let prod = apply_multiplier(&f, |xi| m1(xi) * m2(xi)).unwrap();
            prop_assert!(rel_err(seq.values(), prod.values()) < 1e-12);
        }

        #[test]
        fn lp_norm_is_homogeneous(seed in any::<u64>(), p in 1.0f64..8.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let g = GridSpec::new(1, 32, 2.0).unwrap();
            let f = random_field(g, seed);
            let k = c(re, im);
            let lhs = f.scale(k).lp_norm(p).unwrap();
            let rhs = k.norm() * f.lp_norm(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }
    }
}
