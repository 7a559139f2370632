// SPDX-License-Identifier: Apache-2.0

//! Unit conversions into the internal rad/µs, µs, kelvin system.

use std::f64::consts::TAU;

/// ħ/k_B in K·s.
pub const HBAR_OVER_KB: f64 = 7.638_232_577_577_6e-12;

/// ħ/k_B scaled so that `HBAR_OVER_KB_US * ω[rad/µs] / T[K]` is dimensionless.
pub const HBAR_OVER_KB_US: f64 = HBAR_OVER_KB * 1e6;

/// Linear frequency in MHz to angular frequency in rad/µs.
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e3
}

pub fn khz(f: f64) -> f64 {
    TAU * f * 1e-3
}

pub fn ns(t: f64) -> f64 {
    t * 1e-3
}

pub fn millikelvin(t: f64) -> f64 {
    t * 1e-3
}
