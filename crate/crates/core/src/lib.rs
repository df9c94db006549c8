//! Modulation-space norms, dispersive propagators and Hartree-type
//! evolution on periodic grids, with numerical checks of the estimates
//! behind their well-posedness theory.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod field;
pub mod io;
pub mod kernels;
pub mod modnorm;
pub mod propagators;
pub mod serde_ext;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{CaseTag, Equation, Exponent, Rational, ThirdConditionMode};
pub use field::{GridSpec, SampledField, Space};
pub use kernels::{HartreeKernel, ZeroModePolicy};
pub use modnorm::{modulation_norm, NormSpec, TransitionProfile, WindowSystem};
pub use propagators::{PropagatorKind, PropagatorSpec};
pub use solver::{EquationKind, EquationSpec, SolveConfig, Termination, Trajectory};
pub use verify::{EstimateReport, EstimateSpec, Verdict, VerifyPlan};
pub use num_complex::Complex64;
