// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks in `benches/`.

use std::f64::consts::TAU;

use cavity_core::{EnvironmentSpec, Lineshape, SpectralModel, TimeGrid};

pub const CAVITY: f64 = TAU * 2690.0;

/// Strongly coupled q-Gaussian ensemble (8.6 MHz coupling, 9.4 MHz FWHM).
pub fn strong_model() -> SpectralModel {
    SpectralModel::new(Lineshape::QGaussian { q: 1.39 }, CAVITY, TAU * 8.6, TAU * 9.4).expect("valid model")
}

/// 0.4 MHz leakage at 25 mK.
pub fn warm_env() -> EnvironmentSpec {
    EnvironmentSpec::new(TAU * 0.4, 0.025, 0.025, CAVITY).expect("valid environment")
}

pub fn grid(dt_ns: f64, horizon_us: f64) -> TimeGrid {
    TimeGrid::covering(dt_ns * 1e-3, horizon_us).expect("valid grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(strong_model().coupling(), TAU * 8.6);
        assert!(!warm_env().zero_temperature());
        assert_eq!(grid(1.0, 1.0).steps, 1000);
    }
}
