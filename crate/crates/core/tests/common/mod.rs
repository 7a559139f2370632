// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use cavity_core::{EnvironmentSpec, HoleSpec, Lineshape, SpectralModel, C64};

/// Cavity at 2.69 GHz, ensemble on resonance.
pub const CAVITY: f64 = TAU * 2690.0;
pub const Q: f64 = 1.39;

pub fn coupling() -> f64 {
    TAU * 8.6
}

pub fn fwhm() -> f64 {
    18.8 * PI
}

pub fn kappa() -> f64 {
    TAU * 0.4
}

/// Normal-mode splitting used for hole placement.
pub fn rabi() -> f64 {
    TAU * 21.3
}

pub fn q_gaussian() -> SpectralModel {
    SpectralModel::new(Lineshape::QGaussian { q: Q }, CAVITY, coupling(), fwhm()).unwrap()
}

pub fn holes() -> Vec<HoleSpec> {
    let w = 0.02 * rabi();
    vec![HoleSpec::rectangular(CAVITY - rabi() / 2.0, w), HoleSpec::rectangular(CAVITY + rabi() / 2.0, w)]
}

pub fn cold(kappa: f64) -> EnvironmentSpec {
    EnvironmentSpec::new(kappa, 0.0, 0.0, CAVITY).unwrap()
}

/// T_s = T_e = 25 mK.
pub fn warm(kappa: f64) -> EnvironmentSpec {
    let t = cavity_core::units::millikelvin(25.0);
    EnvironmentSpec::new(kappa, t, t, CAVITY).unwrap()
}

pub fn sup(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Times of interior local maxima of a sampled series.
pub fn maxima(t: &[f64], f: &[f64]) -> Vec<f64> {
    (1..f.len() - 1).filter(|&i| f[i] > f[i - 1] && f[i] >= f[i + 1]).map(|i| t[i]).collect()
}

/// Reference lineshape with the coupling chosen so the normal modes sit at ω_s ± Ω_R/2.
pub fn calibrated() -> SpectralModel {
    let base = q_gaussian();
    let om = cavity_core::calibrate_coupling(&base, &cold(0.0), rabi()).unwrap();
    base.with_coupling(om).unwrap()
}

pub fn burned() -> SpectralModel {
    calibrated().with_holes(holes()).unwrap()
}
