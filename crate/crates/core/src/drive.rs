// SPDX-License-Identifier: Apache-2.0

//! Driving fields f(t) = η(t)e^{−iω_p t}, expressed in the frame rotating at ω_c.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::propagator_time::{solve_y, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveKind {
    None,
    Rectangular,
    /// Sign of η flips at `t_flip`.
    PhaseFlip { t_flip: f64 },
    /// η(t) = η₀ sin(ω_m (t − t_on) + phase).
    Sinusoidal { modulation: f64, phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub kind: DriveKind,
    /// η₀ in rad/µs.
    pub amplitude: f64,
    /// Absolute carrier ω_p, rad/µs.
    pub carrier: f64,
    pub t_on: f64,
    /// May be +∞ for a drive that never switches off.
    pub t_off: f64,
}

/// One exponential piece A·e^{−iνt} active on [start, end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePiece {
    pub amplitude: C64,
    pub nu: f64,
    pub start: f64,
    pub end: f64,
}

impl DriveSpec {
    pub fn none() -> Self {
        DriveSpec { kind: DriveKind::None, amplitude: 0.0, carrier: 0.0, t_on: 0.0, t_off: 0.0 }
    }

    pub fn rectangular(amplitude: f64, carrier: f64, t_on: f64, t_off: f64) -> Self {
        DriveSpec { kind: DriveKind::Rectangular, amplitude, carrier, t_on, t_off }
    }

    pub fn phase_flip(amplitude: f64, carrier: f64, t_on: f64, t_flip: f64, t_off: f64) -> Self {
        DriveSpec { kind: DriveKind::PhaseFlip { t_flip }, amplitude, carrier, t_on, t_off }
    }

    pub fn sinusoidal(amplitude: f64, carrier: f64, t_on: f64, t_off: f64, modulation: f64, phase: f64) -> Self {
        DriveSpec { kind: DriveKind::Sinusoidal { modulation, phase }, amplitude, carrier, t_on, t_off }
    }

    pub fn scaled(&self, s: f64) -> Self {
        DriveSpec { amplitude: self.amplitude * s, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == DriveKind::None {
            return Ok(());
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Parameter(format!("drive amplitude must be non-negative, got {}", self.amplitude)));
        }
        if !(self.t_on >= 0.0 && self.t_on.is_finite()) || self.t_off.is_nan() || self.t_off < self.t_on {
            return Err(Error::Parameter("drive needs 0 ≤ t_on ≤ t_off".into()));
        }
        if !self.carrier.is_finite() {
            return Err(Error::Parameter("drive carrier must be finite".into()));
        }
        match self.kind {
            DriveKind::PhaseFlip { t_flip } if !(self.t_on <= t_flip && t_flip <= self.t_off) => {
                Err(Error::Parameter("phase flip needs t_on ≤ t_flip ≤ t_off".into()))
            }
            DriveKind::Sinusoidal { modulation, phase } if !(modulation.is_finite() && phase.is_finite()) => {
                Err(Error::Parameter("modulation frequency and phase must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Decompose into exponential pieces in the frame rotating at `cavity`.
    pub fn pieces(&self, cavity: f64) -> Vec<DrivePiece> {
        let nu = self.carrier - cavity;
        let eta = C64::new(self.amplitude, 0.0);
        let (a, b) = (self.t_on, self.t_off);
        let piece = |amplitude, nu, start, end| DrivePiece { amplitude, nu, start, end };
        let mut out = match self.kind {
            DriveKind::None => vec![],
            DriveKind::Rectangular => vec![piece(eta, nu, a, b)],
            DriveKind::PhaseFlip { t_flip } => vec![piece(eta, nu, a, t_flip), piece(-eta, nu, t_flip, b)],
            DriveKind::Sinusoidal { modulation: wm, phase } => {
                // sin θ = (e^{iθ} − e^{−iθ})/2i with θ = ω_m(t − t_on) + φ
                let c = C64::from_polar(1.0, phase - wm * a) / C64::new(0.0, 2.0) * self.amplitude;
                let d = -C64::from_polar(1.0, wm * a - phase) / C64::new(0.0, 2.0) * self.amplitude;
                vec![piece(c, nu - wm, a, b), piece(d, nu + wm, a, b)]
            }
        };
        out.retain(|p| p.end > p.start && p.amplitude != C64::new(0.0, 0.0));
        out
    }
}

/// Rotating-frame drive η(t)e^{−i(ω_p−ω_c)t}.
pub fn evaluate_drive(spec: &DriveSpec, cavity: f64, t: f64) -> C64 {
    spec.pieces(cavity)
        .iter()
        .filter(|p| p.start <= t && t < p.end)
        .map(|p| p.amplitude * C64::from_polar(1.0, -p.nu * t))
        .sum()
}

/// Rescale `spec` so the peak coherent photon number max_t |ỹ(t)|² equals `photons`.
/// ỹ is linear in η₀, so one solve at the current amplitude fixes the scale.
pub fn calibrate_amplitude(
    spec: &DriveSpec,
    u: &[C64],
    udot: &[C64],
    cavity: f64,
    grid: &TimeGrid,
    photons: f64,
) -> Result<DriveSpec> {
    if !(photons > 0.0 && photons.is_finite()) {
        return Err(Error::Parameter(format!("target photon number must be positive, got {photons}")));
    }
    let unit = DriveSpec { amplitude: 1.0, ..*spec };
    let y = solve_y(u, udot, &unit, cavity, grid)?;
    let peak = y.iter().map(|y| y.norm_sqr()).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Parameter("drive produces no field on this grid".into()));
    }
    Ok(unit.scaled((photons / peak).sqrt()))
}
