// SPDX-License-Identifier: Apache-2.0

//! Non-Markovian decoherence dynamics of a driven single-mode cavity coupled to an
//! inhomogeneously broadened bosonic spin ensemble and a Markovian leakage channel.
//!
//! Units: angular frequencies in rad/µs, times in µs, ħ = 1. Every propagator lives in
//! the frame rotating at the cavity frequency ω_c.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drive;
pub mod master_coeffs;
pub mod observables;
pub mod oracle;
pub mod propagator_freq;
pub mod propagator_time;
pub mod quad;
pub mod spectral;
pub mod units;

mod error;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use num_complex::Complex64 as C64;

pub use drive::{calibrate_amplitude, evaluate_drive, DriveKind, DriveSpec};
pub use master_coeffs::{classify_regime, coefficients, CoefficientSeries, RegimeReport};
pub use observables::{intensity, mean_field, CorrelationGrid, InitialCavityState, Intensity};
pub use propagator_freq::{
    calibrate_coupling, find_localized_modes, response_function, self_energy, u_from_spectrum,
    ContinuumPath, LocalizedMode, SelfEnergy,
};
pub use propagator_time::{solve_u, solve_v, solve_y, Propagators, ThermalNoise, TimeGrid};
pub use spectral::{
    bose_occupation, evaluate_density, memory_kernels, EnvironmentSpec, HoleProfile, HoleSpec,
    Lineshape, MemoryKernels, SpectralModel,
};
