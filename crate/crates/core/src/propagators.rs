//! Free-evolution Fourier multipliers, applied exactly per mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{apply_multiplier, japanese_bracket, SampledField, Space};

/// Convention label written into run artifacts.
pub const PHASE_CONVENTION: &str = "U(t) = exp(i t (2 pi |xi|)^alpha), F f(xi) = int f(x) exp(-2 pi i x.xi) dx";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropagatorKind {
    /// `e^{it(2π|ξ|)^α}`.
    FracSchrodinger { alpha: f64 },
    /// `e^{it 4π²|ξ|²}`.
    Schrodinger,
    /// `e^{itω(ξ)}` with `ω = (1 + 4π²|ξ|²)^{1/2}`.
    KgGroup,
    /// `sin(tω)/ω`.
    KgSine,
    /// `cos(tω)`.
    KgCosine,
    /// `sin(2πt|ξ|)/(2π|ξ|)`, equal to `t` at the origin.
    WaveSine,
    /// `cos(2πt|ξ|)`.
    WaveCosine,
}

impl PropagatorKind {
    pub fn validate(&self) -> Result<()> {
        if let Self::FracSchrodinger { alpha } = self {
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidExponent(format!("alpha = {alpha} must be positive")));
            }
        }
        Ok(())
    }

    pub fn is_unimodular(&self) -> bool {
        matches!(self, Self::FracSchrodinger { .. } | Self::Schrodinger | Self::KgGroup)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    #[serde(flatten)]
    pub kind: PropagatorKind,
    pub t: f64,
}

impl PropagatorSpec {
    pub fn new(kind: PropagatorKind, t: f64) -> Result<Self> {
        kind.validate()?;
        if !t.is_finite() {
            return Err(Error::InvalidExponent(format!("time {t} is not finite")));
        }
        Ok(Self { kind, t })
    }
}

/// Klein–Gordon dispersion `ω(ξ) = (1 + 4π²|ξ|²)^{1/2}`.
pub fn kg_frequency(xi: &[f64]) -> f64 {
    japanese_bracket(xi)
}

/// Wave dispersion `2π|ξ|`.
pub fn wave_frequency(xi: &[f64]) -> f64 {
    2.0 * PI * xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Fractional dispersion `(2π|ξ|)^α`.
pub fn frac_frequency(xi: &[f64], alpha: f64) -> f64 {
    wave_frequency(xi).powf(alpha)
}

/// `sin(tΩ)/Ω`, continuous at `Ω = 0`.
pub fn sinc_t(t: f64, omega: f64) -> f64 {
    let z = t * omega;
    if z.abs() < 1e-8 {
        t * (1.0 - z * z / 6.0)
    } else {
        z.sin() / omega
    }
}

pub fn propagator_symbol(spec: &PropagatorSpec, xi: &[f64]) -> Complex64 {
    let t = spec.t;
    match spec.kind {
        PropagatorKind::FracSchrodinger { alpha } => {
            Complex64::from_polar(1.0, t * frac_frequency(xi, alpha))
        }
        PropagatorKind::Schrodinger => {
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            Complex64::from_polar(1.0, t * 4.0 * PI * PI * r2)
        }
        PropagatorKind::KgGroup => Complex64::from_polar(1.0, t * kg_frequency(xi)),
        PropagatorKind::KgSine => Complex64::new(sinc_t(t, kg_frequency(xi)), 0.0),
        PropagatorKind::KgCosine => Complex64::new((t * kg_frequency(xi)).cos(), 0.0),
        PropagatorKind::WaveSine => Complex64::new(sinc_t(t, wave_frequency(xi)), 0.0),
        PropagatorKind::WaveCosine => Complex64::new((t * wave_frequency(xi)).cos(), 0.0),
    }
}

/// Result in the same space as the input.
pub fn apply_propagator(f: &SampledField, spec: &PropagatorSpec) -> Result<SampledField> {
    spec.kind.validate()?;
    apply_multiplier(f, |xi| propagator_symbol(spec, xi))
}

/// Second-order linear flows `u_tt + Ω(D)² u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveFamily {
    KleinGordon,
    Wave,
}

impl WaveFamily {
    pub fn frequency(self, xi: &[f64]) -> f64 {
        match self {
            Self::KleinGordon => kg_frequency(xi),
            Self::Wave => wave_frequency(xi),
        }
    }
}

/// Advances `(û, û_t)` of a single mode with frequency `omega` by `t`.
pub fn advance_mode(omega: f64, t: f64, u: Complex64, ut: Complex64) -> (Complex64, Complex64) {
    let c = (t * omega).cos();
    let s = sinc_t(t, omega);
    // ω sin(tω) written via sinc to stay exact at ω = 0.
    let ws = omega * omega * s;
    (u * c + ut * s, ut * c - u * ws)
}

/// Free flow `(u, u_t)(t)` from data `(u0, u1)`, both returned in physical space.
pub fn free_flow(
    family: WaveFamily,
    u0: &SampledField,
    u1: &SampledField,
    t: f64,
) -> Result<(SampledField, SampledField)> {
    if u0.grid() != u1.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *u0.grid();
    let a = u0.to_frequency().into_values();
    let b = u1.to_frequency().into_values();
    let mut u = Vec::with_capacity(a.len());
    let mut ut = Vec::with_capacity(a.len());
    let mut omegas = vec![0.0; a.len()];
    grid.for_each_frequency(|flat, xi| omegas[flat] = family.frequency(xi));
    for ((x, y), w) in a.iter().zip(&b).zip(&omegas) {
        let (p, q) = advance_mode(*w, t, *x, *y);
        u.push(p);
        ut.push(q);
    }
    Ok((
        SampledField::new(grid, u, Space::Frequency)?.to_physical(),
        SampledField::new(grid, ut, Space::Frequency)?.to_physical(),
    ))
}

/// `u(t) = K′(t)u₀ + K(t)u₁` and its time derivative.
pub fn free_kg_flow(
    u0: &SampledField,
    u1: &SampledField,
    t: f64,
) -> Result<(SampledField, SampledField)> {
    free_flow(WaveFamily::KleinGordon, u0, u1, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [PropagatorKind; 7] = [
        PropagatorKind::FracSchrodinger { alpha: 1.5 },
        PropagatorKind::Schrodinger,
        PropagatorKind::KgGroup,
        PropagatorKind::KgSine,
        PropagatorKind::KgCosine,
        PropagatorKind::WaveSine,
        PropagatorKind::WaveCosine,
    ];

    fn random_field(grid: GridSpec, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledField::from_spectrum_fn(grid, |xi| {
            if xi.iter().all(|v| v.abs() <= 4.0) {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap()
        .to_physical()
    }

    #[test]
    fn symbols_at_time_zero() {
        for kind in ALL {
            let spec = PropagatorSpec::new(kind, 0.0).unwrap();
            let v = propagator_symbol(&spec, &[0.7]);
            let expected = match kind {
                PropagatorKind::KgSine | PropagatorKind::WaveSine => 0.0,
                _ => 1.0,
            };
            assert_eq!(v, Complex64::new(expected, 0.0), "{kind:?}");
        }
    }

    #[test]
    fn symbols_at_origin() {
        let t = 1.3;
        let kg = propagator_symbol(&PropagatorSpec::new(PropagatorKind::KgSine, t).unwrap(), &[0.0]);
        assert!((kg.re - t.sin()).abs() < 1e-15);
        let w = propagator_symbol(&PropagatorSpec::new(PropagatorKind::WaveSine, t).unwrap(), &[0.0]);
        assert_eq!(w.re, t);
    }

    #[test]
    fn symbol_bounds() {
        for &t in &[0.3, 2.0, -7.5] {
            for j in 0..200 {
                let xi = [j as f64 * 0.05 - 5.0];
                let g = propagator_symbol(&PropagatorSpec::new(PropagatorKind::KgGroup, t).unwrap(), &xi);
                assert!((g.norm() - 1.0).abs() < 1e-15);
                let k = propagator_symbol(&PropagatorSpec::new(PropagatorKind::KgSine, t).unwrap(), &xi);
                assert!(k.re.abs() <= t.abs().min(1.0) + 1e-15);
            }
        }
        assert!(PropagatorSpec::new(PropagatorKind::FracSchrodinger { alpha: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn schrodinger_gaussian_closed_form() {
        let g = GridSpec::new(1, 8192, 1024.0).unwrap();
        let u0 = SampledField::from_fn(g, |x| Complex64::new((-PI * x[0] * x[0]).exp(), 0.0)).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let u = apply_propagator(&u0, &PropagatorSpec::new(PropagatorKind::Schrodinger, t).unwrap())
                .unwrap();
            // ŭ(t) = e^{-πξ²(1 - 4πit)} inverts to (1 - 4πit)^{-1/2} e^{-πx²/(1 - 4πit)}.
            let a = Complex64::new(1.0, -4.0 * PI * t);
            let err = SampledField::from_fn(g, |x| a.powf(-0.5) * (-PI * x[0] * x[0] / a).exp())
                .unwrap()
                .sub(&u)
                .unwrap()
                .max_abs();
            assert!(err < 1e-8, "t={t}: {err:e}");
        }
    }

    #[test]
    fn kg_group_inverse_and_decomposition() {
        let g = GridSpec::new(2, 32, 4.0).unwrap();
        let f = random_field(g, 4);
        let fwd = apply_propagator(&f, &PropagatorSpec::new(PropagatorKind::KgGroup, 3.7).unwrap()).unwrap();
        let back = apply_propagator(&fwd, &PropagatorSpec::new(PropagatorKind::KgGroup, -3.7).unwrap()).unwrap();
        assert!(back.sub(&f).unwrap().max_abs() < 1e-11 * f.max_abs());
        // G(t) = K′(t) + i ω K(t), with ω the square root of I − Δ.
        let t = 0.9;
        for xi in [[0.0, 0.0], [1.25, -0.5], [3.0, 2.0]] {
            let sym = |k| propagator_symbol(&PropagatorSpec::new(k, t).unwrap(), &xi);
            let rhs = sym(PropagatorKind::KgCosine)
                + Complex64::i() * kg_frequency(&xi) * sym(PropagatorKind::KgSine);
            assert!((sym(PropagatorKind::KgGroup) - rhs).norm() < 1e-14);
            // d/dt K(t) = K′(t) by central difference.
            let h = 1e-5;
            let kp = propagator_symbol(&PropagatorSpec::new(PropagatorKind::KgSine, t + h).unwrap(), &xi);
            let km = propagator_symbol(&PropagatorSpec::new(PropagatorKind::KgSine, t - h).unwrap(), &xi);
            assert!(((kp - km) / (2.0 * h) - sym(PropagatorKind::KgCosine)).norm() < 1e-8);
        }
    }

    #[test]
    fn free_kg_flow_cases() {
        let g = GridSpec::new(1, 64, 8.0).unwrap();
        let u0 = random_field(g, 1);
        let zero = SampledField::zeros(g);
        let (u, ut) = free_kg_flow(&u0, &zero, 0.0).unwrap();
        assert!(u.sub(&u0).unwrap().max_abs() < 1e-12);
        assert!(ut.max_abs() < 1e-12);
        // Single mode, u0 = 0.
        let xi0 = 1.5;
        let u1 = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * PI * xi0 * x[0])).unwrap();
        let t = 2.3;
        let (u, _) = free_kg_flow(&zero, &u1, t).unwrap();
        let w = kg_frequency(&[xi0]);
        let expect = u1.scale(Complex64::new((t * w).sin() / w, 0.0));
        assert!(u.sub(&expect).unwrap().max_abs() < 1e-12);
        let other = SampledField::zeros(GridSpec::new(1, 32, 8.0).unwrap());
        assert!(matches!(free_kg_flow(&u0, &other, 1.0), Err(Error::GridMismatch)));
    }

    #[test]
    fn kg_mode_energy_and_ode_residual() {
        let g = GridSpec::new(1, 64, 8.0).unwrap();
        let u0 = random_field(g, 2);
        let u1 = random_field(g, 3);
        let energy = |u: &SampledField, ut: &SampledField| -> Vec<f64> {
            let a = u.to_frequency();
            let b = ut.to_frequency();
            let mut e = vec![0.0; g.len()];
            g.for_each_frequency(|flat, xi| {
                let w = kg_frequency(xi);
                e[flat] = b.values()[flat].norm_sqr() + w * w * a.values()[flat].norm_sqr();
            });
            e
        };
        let e0 = energy(&u0, &u1);
        let scale = e0.iter().cloned().fold(0.0, f64::max);
        for t in [0.1, 1.0, 10.0] {
            let (u, ut) = free_kg_flow(&u0, &u1, t).unwrap();
            let e = energy(&u, &ut);
            let worst = e.iter().zip(&e0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(worst < 1e-10 * scale, "t={t}: {worst:e}");
        }
        // u_tt + ω²u = 0 per mode, via a fourth-order difference of the exact flow.
        let t = 1.7;
        let h = 1e-3;
        let at = |s: f64| free_kg_flow(&u0, &u1, s).unwrap().0.to_frequency();
        let (m2, m1, c0, p1, p2) = (at(t - 2.0 * h), at(t - h), at(t), at(t + h), at(t + 2.0 * h));
        let mut worst = 0.0f64;
        g.for_each_frequency(|flat, xi| {
            let w = kg_frequency(xi);
            let v = |f: &SampledField| f.values()[flat];
            let utt = (-v(&m2) + 16.0 * v(&m1) - 30.0 * v(&c0) + 16.0 * v(&p1) - v(&p2)) / (12.0 * h * h);
            let r = (utt + w * w * v(&c0)).norm() / (w * w * (1.0 + v(&c0).norm()));
            worst = worst.max(r);
        });
        assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn wave_zero_mode_polynomial() {
        let (u, ut) = advance_mode(0.0, 2.5, Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0));
        assert_eq!(u, Complex64::new(8.5, 0.0));
        assert_eq!(ut, Complex64::new(3.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn group_law_and_isometry(seed in any::<u64>(), t in -5.0f64..5.0, s in -5.0f64..5.0, k in 0usize..3, alpha in 0.5f64..2.0) {
            let kind = [PropagatorKind::FracSchrodinger { alpha }, PropagatorKind::Schrodinger, PropagatorKind::KgGroup][k];
            let g = GridSpec::new(1, 64, 8.0).unwrap();
            let f = random_field(g, seed);
            let step = |f: &SampledField, t| apply_propagator(f, &PropagatorSpec::new(kind, t).unwrap()).unwrap();
            let two = step(&step(&f, t), s);
            let one = step(&f, t + s);
            prop_assert!(two.sub(&one).unwrap().max_abs() <= 1e-11 * f.max_abs());
            let n0 = f.lp_norm(2.0).unwrap();
            prop_assert!((step(&f, t).lp_norm(2.0).unwrap() - n0).abs() <= 1e-12 * n0);
        }
    }
}
