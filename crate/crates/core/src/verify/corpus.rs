//! Deterministic field corpora.
//!
//! Every member is defined by a continuous recipe whose random draws do not
//! depend on the grid resolution, so the same member can be sampled on a grid
//! and on its refinement (same side length, doubled point count).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::modnorm::{max_box_index, TransitionProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusGenerator {
    /// White spectral noise under a smooth cutoff at a per-member band in
    /// `[band/2, band]` (sup norm of the frequency).
    RandomBandlimited { seed: u64, band: f64 },
    /// `e^{-π|x-c|²/w²} e^{2πi m x₀}` with a small random shift `c` and phase.
    GaussianFamily {
        widths: Vec<f64>,
        modulations: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
    /// Random spectra supported where a single window equals one.
    SingleBox {
        ks: Vec<Vec<i64>>,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldCorpus {
    pub generator: CorpusGenerator,
    pub count: usize,
}

impl FieldCorpus {
    pub fn new(generator: CorpusGenerator, count: usize) -> Self {
        Self { generator, count }
    }

    pub fn seed(&self) -> u64 {
        match &self.generator {
            CorpusGenerator::RandomBandlimited { seed, .. }
            | CorpusGenerator::GaussianFamily { seed, .. }
            | CorpusGenerator::SingleBox { seed, .. } => *seed,
        }
    }

    /// Largest frequency (sup norm) a member can carry, ignoring Gaussian tails.
    pub fn nominal_band(&self) -> f64 {
        match &self.generator {
            CorpusGenerator::RandomBandlimited { band, .. } => *band,
            CorpusGenerator::GaussianFamily { widths, modulations, .. } => {
                let w = widths.iter().cloned().fold(f64::INFINITY, f64::min);
                let m = modulations.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                m + 6.0 / w
            }
            CorpusGenerator::SingleBox { ks, .. } => {
                ks.iter().flatten().fold(0.0f64, |a, &k| a.max(k.unsigned_abs() as f64)) + 0.5
            }
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let bad = |path: &str, message: String| {
            Err(Error::Config { path: format!("corpus.{path}"), message })
        };
        if self.count == 0 {
            return bad("count", "must be positive".into());
        }
        match &self.generator {
            CorpusGenerator::RandomBandlimited { band, .. } => {
                if !(band.is_finite() && *band > 0.0) {
                    return bad("generator.band", format!("{band} must be positive"));
                }
                if (band * grid.length()).floor() as usize >= grid.n() / 2 {
                    return bad("generator.band", format!("{band} exceeds the grid Nyquist"));
                }
            }
            CorpusGenerator::GaussianFamily { widths, modulations, .. } => {
                if widths.is_empty() || widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return bad("generator.widths", "need positive widths".into());
                }
                if modulations.is_empty() || modulations.iter().any(|m| !m.is_finite()) {
                    return bad("generator.modulations", "need finite modulations".into());
                }
            }
            CorpusGenerator::SingleBox { ks, .. } => {
                let kmax = max_box_index(grid);
                if ks.is_empty() {
                    return bad("generator.ks", "need at least one box".into());
                }
                for k in ks {
                    if k.len() != grid.dim() || k.iter().any(|v| v.abs() > kmax) {
                        return bad("generator.ks", format!("box {k:?} is not a resolvable index"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn member(&self, grid: &GridSpec, index: usize) -> Result<SampledField> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        rng.set_stream(index as u64);
        match &self.generator {
            CorpusGenerator::RandomBandlimited { band, .. } => {
                let b = band * rng.gen_range(0.5..=1.0);
                let coeffs = lattice_noise(grid, *band, &mut rng);
                let reach = (band * grid.length()).floor() as i64;
                spectrum_from_lattice(grid, reach, &coeffs, |xi| {
                    let r = xi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    TransitionProfile::Smooth.bump(r / b)
                })
            }
            CorpusGenerator::GaussianFamily { widths, modulations, .. } => {
                let w = widths[index % widths.len()];
                let m = modulations[(index / widths.len()) % modulations.len()];
                let shift: Vec<f64> =
                    (0..grid.dim()).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                SampledField::from_fn(*grid, |x| {
                    let r2: f64 = x.iter().zip(&shift).map(|(a, c)| (a - c).powi(2)).sum();
                    let carrier =
                        Complex64::from_polar(1.0, std::f64::consts::TAU * m * x[0]);
                    phase * carrier * (-std::f64::consts::PI * r2 / (w * w)).exp()
                })
            }
            CorpusGenerator::SingleBox { ks, .. } => {
                let k = &ks[index % ks.len()];
                let centre: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                let reach = ((centre.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 0.5)
                    * grid.length())
                .ceil() as i64;
                let coeffs = lattice_noise(grid, reach as f64 / grid.length(), &mut rng);
                spectrum_from_lattice(grid, reach, &coeffs, |xi| {
                    let r = xi.iter().zip(&centre).fold(0.0f64, |a, (v, c)| a.max((v - c).abs()));
                    TransitionProfile::Smooth.bump(2.0 * r)
                })
            }
        }
    }

    pub fn generate(&self, grid: &GridSpec) -> Result<Vec<SampledField>> {
        self.validate(grid)?;
        (0..self.count).map(|i| self.member(grid, i)).collect()
    }
}

/// Complex normal draws on the lattice `|m|∞ ≤ band·L`, lexicographic order.
fn lattice_noise(grid: &GridSpec, band: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let reach = (band * grid.length()).floor() as i64;
    let side = (2 * reach + 1) as usize;
    (0..side.pow(grid.dim() as u32))
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

fn spectrum_from_lattice(
    grid: &GridSpec,
    reach: i64,
    coeffs: &[Complex64],
    taper: impl Fn(&[f64]) -> f64,
) -> Result<SampledField> {
    let dim = grid.dim();
    let side = 2 * reach + 1;
    if reach >= (grid.n() / 2) as i64 {
        return Err(Error::InvalidField(format!("lattice reach {reach} exceeds the grid")));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut signed = vec![0i64; dim];
    let mut xi = vec![0.0; dim];
    for (lex, c) in coeffs.iter().enumerate() {
        let mut rest = lex as i64;
        for a in (0..dim).rev() {
            signed[a] = rest % side - reach;
            rest /= side;
            xi[a] = signed[a] as f64 / grid.length();
        }
        let w = taper(&xi);
        if w != 0.0 {
            values[grid.frequency_flat(&signed)] = c * w;
        }
    }
    Ok(SampledField::new(*grid, values, crate::field::Space::Frequency)?.to_physical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modnorm::{build_windows, TransitionProfile};

    fn grid() -> GridSpec {
        GridSpec::new(1, 256, 16.0).unwrap()
    }

    #[test]
    fn deterministic_and_resolution_independent() {
        let c = FieldCorpus::new(CorpusGenerator::RandomBandlimited { seed: 3, band: 3.0 }, 4);
        let a = c.generate(&grid()).unwrap();
        let b = c.generate(&grid()).unwrap();
        assert_eq!(a, b);
        let fine = c.member(&grid().refined().unwrap(), 2).unwrap();
        let coarse = &a[2];
        // Every coarse sample point is every other fine sample point.
        for (j, v) in coarse.values().iter().enumerate() {
            assert!((v - fine.values()[2 * j]).norm() < 1e-11 * coarse.max_abs());
        }
    }

    #[test]
    fn members_are_resolved() {
        let ws = build_windows(&grid(), TransitionProfile::Smooth).unwrap();
        let corpora = [
            FieldCorpus::new(CorpusGenerator::RandomBandlimited { seed: 1, band: 4.0 }, 5),
            FieldCorpus::new(
                CorpusGenerator::GaussianFamily {
                    widths: vec![1.0, 2.0],
                    modulations: vec![0.0, 2.0],
                    seed: 0,
                },
                4,
            ),
            FieldCorpus::new(
                CorpusGenerator::SingleBox { ks: vec![vec![0], vec![-3], vec![5]], seed: 9 },
                3,
            ),
        ];
        for c in corpora {
            for f in c.generate(&grid()).unwrap() {
                assert!(ws.escaping_mass(&f).unwrap() < 1e-12);
                assert!(f.spectral_l2() > 1e-3);
            }
        }
    }

    #[test]
    fn single_box_stays_inside_its_plateau() {
        let g = grid();
        let c = FieldCorpus::new(CorpusGenerator::SingleBox { ks: vec![vec![2]], seed: 4 }, 1);
        let spec = c.member(&g, 0).unwrap().to_frequency();
        let mut outside = 0.0;
        g.for_each_frequency(|flat, xi| {
            if (xi[0] - 2.0).abs() >= 0.5 {
                outside += spec.values()[flat].norm_sqr();
            }
        });
        assert!(outside < 1e-24);
    }

    #[test]
    fn rejects_bad_specs() {
        let c = FieldCorpus::new(CorpusGenerator::RandomBandlimited { seed: 1, band: 9.0 }, 2);
        assert!(matches!(c.generate(&grid()), Err(Error::Config { .. })));
        let c = FieldCorpus::new(CorpusGenerator::SingleBox { ks: vec![vec![40]], seed: 0 }, 1);
        assert!(matches!(c.generate(&grid()), Err(Error::Config { .. })));
    }
}
