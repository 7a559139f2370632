// SPDX-License-Identifier: Apache-2.0

//! Frequency-domain analysis: self-energy, response function, spectral inversion of ũ
//! and localized (bound) modes inside spectral holes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::propagator_time::TimeGrid;
use crate::quad::{graded_panels, gl16, Measure};
use crate::spectral::{resolution_horizon, EnvironmentSpec, HoleProfile, PvQuadrature, SpectralModel};
use crate::{Error, Result};

/// Δ(ω) and J_s(ω)/2 at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergy {
    pub omega: f64,
    pub delta: f64,
    pub half_width: f64,
    /// ω sits on a rectangular hole edge; `delta` then omits the divergent log term.
    pub at_hole_edge: bool,
}

/// Boundary value Σ(ω + i0) = Δ(ω) − iJ_s(ω)/2 at absolute ω.
pub fn self_energy(model: &SpectralModel, omega: f64) -> SelfEnergy {
    sample_self_energy(model, &[omega])[0]
}

pub fn sample_self_energy(model: &SpectralModel, omegas: &[f64]) -> Vec<SelfEnergy> {
    let pv = PvQuadrature::new(model);
    omegas
        .par_iter()
        .map(|&omega| {
            let (delta, at_hole_edge) = pv.delta(omega);
            SelfEnergy { omega, delta, half_width: 0.5 * model.density(omega), at_hole_edge }
        })
        .collect()
}

fn response_from(se: &SelfEnergy, env: &EnvironmentSpec) -> Result<C64> {
    let x = se.omega - env.cavity_frequency - se.delta;
    let den = C64::new(x, env.kappa + se.half_width);
    if env.kappa == 0.0 && se.half_width == 0.0 && x.abs() <= 1e-12 * (1.0 + se.omega.abs()) {
        return Err(Error::Singular { omega: se.omega });
    }
    Ok(C64::new(0.0, 1.0) / den)
}

/// U(ω + i0) = i/(ω − ω_c + iκ − Δ(ω) + iJ_s(ω)/2).
pub fn response_function(model: &SpectralModel, env: &EnvironmentSpec, omega: f64) -> Result<C64> {
    response_from(&self_energy(model, omega), env)
}

/// (Δ, J/2, U) sampled on a frequency list; U is `None` at exact poles.
pub fn sample_response(model: &SpectralModel, env: &EnvironmentSpec, omegas: &[f64]) -> Vec<(SelfEnergy, Option<C64>)> {
    sample_self_energy(model, omegas)
        .into_iter()
        .map(|se| (se, response_from(&se, env).ok()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizedMode {
    /// Absolute ω_b, rad/µs.
    pub frequency: f64,
    /// 𝒵 = 1/(1 − Δ′(ω_b)).
    pub residue: f64,
    pub slope: f64,
    /// Root fell on a hole edge where Δ′ is unbounded; residue set to 0.
    pub at_edge: bool,
}

/// Roots of ω − ω_c − Δ(ω) inside rectangular holes (where J_s vanishes), with κ
/// treated as zero. Smooth notches vanish only at a single point and carry no modes.
pub fn find_localized_modes(model: &SpectralModel, env: &EnvironmentSpec) -> Vec<LocalizedMode> {
    let pv = PvQuadrature::new(model);
    let d = |w: f64| w - env.cavity_frequency - pv.delta(w).0;
    let mut modes = Vec::new();
    for h in model.holes().iter().filter(|h| h.profile == HoleProfile::Rectangular) {
        let (a, b) = h.window();
        let eps = 1e-9 * h.half_width;
        let (mut lo, mut hi) = (a + eps, b - eps);
        let (flo, fhi) = (d(lo), d(hi));
        if flo.signum() == fhi.signum() {
            continue;
        }
        let rising = flo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (d(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let edge_gap = (root - a).min(b - root);
        if edge_gap < 1e-9 * h.half_width.max(1.0) {
            modes.push(LocalizedMode { frequency: root, residue: 0.0, slope: f64::INFINITY, at_edge: true });
            continue;
        }
        let step = (1e-4 * h.half_width).min(0.25 * edge_gap);
        let slope = (pv.delta(root + step).0 - pv.delta(root - step).0) / (2.0 * step);
        modes.push(LocalizedMode { frequency: root, residue: 1.0 / (1.0 - slope), slope, at_edge: false });
    }
    modes
}

/// Coupling Ω for which the hole-free model has its normal-mode crossing
/// ω − ω_c = Δ(ω) at ω = ω_s + splitting/2. Since Δ ∝ Ω², this is explicit.
pub fn calibrate_coupling(model: &SpectralModel, env: &EnvironmentSpec, splitting: f64) -> Result<f64> {
    let unit = SpectralModel::new(model.shape(), model.center(), 1.0, model.fwhm())?;
    let target = model.center() + 0.5 * splitting;
    let (d1, _) = PvQuadrature::new(&unit).delta(target);
    let ratio = (target - env.cavity_frequency) / d1;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Parameter(format!(
            "no coupling places a normal mode at {target} rad/µs for this cavity detuning"
        )));
    }
    Ok(ratio.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuumPath {
    /// Fourier inversion of U(ω + i0), free-cavity part subtracted analytically.
    Inversion,
    /// (2/π)∫J e^{−ixt}/(4[x − Δ + iκ]² + J²)dx as written for the branch cut.
    BranchCut,
}

/// ũ on the grid from the frequency domain: localized-mode sum (κ = 0 only) plus the
/// continuum integral.
pub fn u_from_spectrum(
    model: &SpectralModel,
    env: &EnvironmentSpec,
    grid: &TimeGrid,
    path: ContinuumPath,
) -> Result<Vec<C64>> {
    let kappa = env.kappa;
    let wc = env.cavity_frequency;
    let mut u = vec![C64::new(0.0, 0.0); grid.steps + 1];
    if model.is_uncoupled() && kappa > 0.0 && path == ContinuumPath::Inversion {
        for (n, v) in u.iter_mut().enumerate() {
            *v = C64::new((-kappa * grid.time(n)).exp(), 0.0);
        }
        return Ok(u);
    }
    let modes = find_localized_modes(model, env);
    let pv = PvQuadrature::new(model);
    let x_measure = continuum_measure(model, env, grid.horizon(), &modes);

    // spectral weight per node, in the rotating frame
    let weights: Vec<C64> = x_measure
        .nodes
        .par_iter()
        .zip(&x_measure.weights)
        .map(|(&x, &w)| {
            let omega = x + wc;
            let j = model.density(omega);
            let (delta, _) = pv.delta(omega);
            let d = x - delta;
            let val = match path {
                ContinuumPath::Inversion => {
                    let g = kappa + 0.5 * j;
                    let a = 2.0 * g / (d * d + g * g);
                    let a0 = if kappa > 0.0 { 2.0 * kappa / (x * x + kappa * kappa) } else { 0.0 };
                    C64::new((a - a0) / TAU, 0.0)
                }
                ContinuumPath::BranchCut => {
                    if j == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        let z = C64::new(d, kappa);
                        2.0 / PI * j / (4.0 * z * z + j * j)
                    }
                }
            };
            val * w
        })
        .collect();

    let chunks: Vec<Vec<C64>> = x_measure
        .nodes
        .par_chunks(256)
        .zip(weights.par_chunks(256))
        .map(|(xs, cs)| {
            let mut part = vec![C64::new(0.0, 0.0); grid.steps + 1];
            for (&x, &c) in xs.iter().zip(cs) {
                let step = C64::from_polar(1.0, -x * grid.dt);
                let mut p = C64::new(1.0, 0.0);
                for (n, v) in part.iter_mut().enumerate() {
                    if n % 64 == 0 {
                        p = C64::from_polar(1.0, -x * grid.time(n));
                    }
                    *v += c * p;
                    p *= step;
                }
            }
            part
        })
        .collect();
    for part in chunks {
        for (v, p) in u.iter_mut().zip(part) {
            *v += p;
        }
    }
    for (n, v) in u.iter_mut().enumerate() {
        let t = grid.time(n);
        if path == ContinuumPath::Inversion && kappa > 0.0 {
            *v += (-kappa * t).exp();
        }
        if kappa == 0.0 {
            for m in modes.iter().filter(|m| !m.at_edge) {
                *v += m.residue * C64::from_polar(1.0, -(m.frequency - wc) * t);
            }
        }
    }
    Ok(u)
}

/// Quadrature in the rotating-frame variable x = ω − ω_c for the continuum integral,
/// refined around holes and around quasi-localized peaks.
fn continuum_measure(model: &SpectralModel, env: &EnvironmentSpec, horizon: f64, modes: &[LocalizedMode]) -> Measure {
    let shift = model.center() - env.cavity_frequency;
    let t_res = resolution_horizon(horizon);
    // widened by |shift| so the cavity-centred free Lorentzian sits in the resolved core
    let core = (15.0 * model.fwhm()).max(10.0 * model.rabi_scale()) + shift.abs();
    let outer = model.window_half_width().max(core) + shift.abs();
    let mut width = (model.fwhm() / 8.0).min(12.0 / t_res);
    if env.kappa > 0.0 {
        width = width.min(0.5 * env.kappa);
    }
    let base = graded_panels(core, outer, width, 1.25);
    let mut edges: Vec<f64> = base.iter().map(|p| p.0 + shift).collect();
    edges.push(base.last().unwrap().1 + shift);
    let mut fine: Vec<(f64, f64, f64)> = Vec::new();
    for h in model.holes() {
        let (a, b) = h.window();
        let (a, b) = (a - env.cavity_frequency, b - env.cavity_frequency);
        let w = h.half_width;
        match h.profile {
            HoleProfile::Rectangular => {
                edges.extend([a, b]);
                fine.push((a - 2.0 * w, b + 2.0 * w, w / 32.0));
            }
            HoleProfile::SmoothNotch => fine.push((a, b, w / 8.0)),
        }
    }
    if env.kappa > 0.0 {
        for m in modes.iter().filter(|m| m.residue > 0.0) {
            let g = (env.kappa * m.residue).max(1e-9);
            let x = m.frequency - env.cavity_frequency;
            fine.push((x - 40.0 * g, x + 40.0 * g, g / 4.0));
        }
    }
    for &(a, b, _) in &fine {
        edges.extend([a, b]);
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut panels = Vec::with_capacity(edges.len());
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        let mid = 0.5 * (a + b);
        let need = fine
            .iter()
            .filter(|f| f.0 <= mid && mid <= f.1)
            .map(|f| f.2)
            .fold(f64::INFINITY, f64::min);
        let n = if need.is_finite() { ((b - a) / need).ceil().max(1.0) as usize } else { 1 };
        let h = (b - a) / n as f64;
        for i in 0..n {
            panels.push((a + h * i as f64, if i + 1 == n { b } else { a + h * (i + 1) as f64 }));
        }
    }
    Measure::from_panels(&panels, gl16())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Lineshape;

    #[test]
    fn lorentzian_self_energy_closed_form() {
        let (om, lam) = (10.0, 4.0);
        let m = SpectralModel::new(Lineshape::Lorentzian, 500.0, om, 2.0 * lam).unwrap();
        for x in [-30.0, -3.0, 0.0, 1.5, 12.0] {
            let se = self_energy(&m, 500.0 + x);
            let exact = om * om * x / (x * x + lam * lam);
            assert!((se.delta - exact).abs() < 1e-6 * om * om / lam, "x={x}: {} vs {exact}", se.delta);
            assert!((se.half_width - om * om * lam / (x * x + lam * lam)).abs() < 1e-9);
        }
    }

    #[test]
    fn free_cavity_response() {
        let m = SpectralModel::uncoupled(100.0);
        let env = EnvironmentSpec::new(0.5, 0.0, 0.0, 100.0).unwrap();
        let u = response_function(&m, &env, 101.0).unwrap();
        assert!((u - C64::new(0.0, 1.0) / C64::new(1.0, 0.5)).norm() < 1e-15);
        let env0 = EnvironmentSpec::new(0.0, 0.0, 0.0, 100.0).unwrap();
        assert!(matches!(response_function(&m, &env0, 100.0), Err(Error::Singular { .. })));
    }
}
