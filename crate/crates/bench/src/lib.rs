//! Inputs shared by the benchmarks.

use modspace::{Complex64, EquationKind, EquationSpec, GridSpec, HartreeKernel, SampledField, ZeroModePolicy};

/// Modulated Gaussian `a·e^{-π|x|²}e^{2πi x₀}` on `grid`.
pub fn packet(grid: GridSpec, amplitude: f64) -> SampledField {
    SampledField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::from_polar(amplitude * (-std::f64::consts::PI * r2).exp(), std::f64::consts::TAU * x[0])
    })
    .expect("packet fits the grid")
}

/// Cubic fractional Hartree problem with a `|x|^{-1/2}` potential.
pub fn hartree_problem(grid: GridSpec) -> EquationSpec {
    let kernel = HartreeKernel::riesz(&grid, 1.0, 0.5, 1, ZeroModePolicy::BoxAverage).expect("valid kernel");
    EquationSpec::new(EquationKind::Fhnls { alpha: 2.0 }, kernel, packet(grid, 0.1), None, false)
        .expect("valid equation")
}
