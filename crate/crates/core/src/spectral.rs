// SPDX-License-Identifier: Apache-2.0

//! Spin-ensemble spectral densities, thermal occupations and memory kernels.
//!
//! Frequencies passed to the public API are absolute (rad/µs). Internally the lineshape
//! is written in the offset x = ω − ω_s from the ensemble centre, and kernels in the
//! rotating-frame detuning δ = ω − ω_c.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::propagator_time::TimeGrid;
use crate::quad::{graded_panels, gl16, uniform_panels, Measure};
use crate::units::HBAR_OVER_KB_US;
use crate::{Error, Result};

/// Largest weight fraction a kernel window may miss.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Smooth notches are integrated over ±this many half-widths.
const NOTCH_EXTENT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Lineshape {
    Gaussian,
    Lorentzian,
    QGaussian { q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleProfile {
    /// Density is exactly zero on the closed window [ω_h − w_h, ω_h + w_h].
    Rectangular,
    /// Multiplies the density by 1 − exp(−((ω − ω_h)/w_h)²); zero only at ω_h.
    SmoothNotch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    /// Absolute hole centre, rad/µs.
    pub center: f64,
    pub half_width: f64,
    pub profile: HoleProfile,
}

impl HoleSpec {
    pub fn rectangular(center: f64, half_width: f64) -> Self {
        HoleSpec { center, half_width, profile: HoleProfile::Rectangular }
    }

    pub fn smooth(center: f64, half_width: f64) -> Self {
        HoleSpec { center, half_width, profile: HoleProfile::SmoothNotch }
    }

    /// Window over which the hole removes weight, absolute frequencies.
    pub fn window(&self) -> (f64, f64) {
        let r = match self.profile {
            HoleProfile::Rectangular => self.half_width,
            HoleProfile::SmoothNotch => NOTCH_EXTENT * self.half_width,
        };
        (self.center - r, self.center + r)
    }

    /// Fraction of the base density removed at ω.
    pub fn removed(&self, omega: f64) -> f64 {
        let z = (omega - self.center) / self.half_width;
        match self.profile {
            HoleProfile::Rectangular => {
                if z.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            HoleProfile::SmoothNotch => {
                if z.abs() <= NOTCH_EXTENT {
                    (-z * z).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Gaussian,
    Lorentzian,
    QGaussian,
    HoleBurned,
}

/// Parametric spin spectral density J_s(ω) = 2πΩ²ρ(ω − ω_s) with ∫ρ = 1, optionally with
/// burnt holes. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralModel {
    shape: Lineshape,
    center: f64,
    coupling: f64,
    fwhm: f64,
    /// Scale parameter: σ (Gaussian), λ (Lorentzian half-width), Δ (q-Gaussian).
    width: f64,
    /// Lineshape normalization C, so that ρ(0) = C.
    norm: f64,
    holes: Vec<HoleSpec>,
}

impl SpectralModel {
    pub fn new(shape: Lineshape, center: f64, coupling: f64, fwhm: f64) -> Result<Self> {
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::Parameter(format!("linewidth must be positive, got {fwhm}")));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::Parameter(format!("coupling must be non-negative, got {coupling}")));
        }
        if !center.is_finite() {
            return Err(Error::Parameter("centre frequency must be finite".into()));
        }
        let (width, norm) = match shape {
            Lineshape::Gaussian => {
                let s = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
                (s, 1.0 / (s * TAU.sqrt()))
            }
            Lineshape::Lorentzian => {
                let l = 0.5 * fwhm;
                (l, 1.0 / (PI * l))
            }
            Lineshape::QGaussian { q } => {
                if !(q > 1.0 && q < 3.0) {
                    return Err(Error::Parameter(format!(
                        "q-Gaussian needs 1 < q < 3 (normalizable, unbounded support), got {q}"
                    )));
                }
                let d = fwhm / (2.0 * ((2f64.powf(q) - 2.0) / (2.0 * q - 2.0)).sqrt());
                (d, 1.0 / (2.0 * d * q_tail_integral(q, 0.0)))
            }
        };
        Ok(SpectralModel { shape, center, coupling, fwhm, width, norm, holes: Vec::new() })
    }

    /// A model with J_s ≡ 0.
    pub fn uncoupled(center: f64) -> Self {
        SpectralModel::new(Lineshape::Lorentzian, center, 0.0, 1.0).expect("valid constants")
    }

    /// Burn holes into the density. Weight is removed, never renormalized.
    pub fn with_holes(mut self, holes: Vec<HoleSpec>) -> Result<Self> {
        for h in &holes {
            if !(h.half_width > 0.0 && h.half_width.is_finite() && h.center.is_finite()) {
                return Err(Error::Parameter(format!("hole half-width must be positive, got {}", h.half_width)));
            }
        }
        let mut all: Vec<(f64, f64)> = self.holes.iter().chain(&holes).map(HoleSpec::window).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        if all.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::Parameter("hole windows overlap".into()));
        }
        self.holes.extend(holes);
        self.holes.sort_by(|a, b| a.center.total_cmp(&b.center));
        Ok(self)
    }

    /// Same shape and holes with a different collective coupling.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::Parameter(format!("coupling must be non-negative, got {coupling}")));
        }
        Ok(SpectralModel { coupling, ..self.clone() })
    }

    pub fn kind(&self) -> ModelKind {
        if !self.holes.is_empty() {
            return ModelKind::HoleBurned;
        }
        match self.shape {
            Lineshape::Gaussian => ModelKind::Gaussian,
            Lineshape::Lorentzian => ModelKind::Lorentzian,
            Lineshape::QGaussian { .. } => ModelKind::QGaussian,
        }
    }

    pub fn shape(&self) -> Lineshape {
        self.shape
    }
    pub fn center(&self) -> f64 {
        self.center
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn normalization(&self) -> f64 {
        self.norm
    }
    pub fn holes(&self) -> &[HoleSpec] {
        &self.holes
    }

    /// Normal-mode splitting scale 2Ω used to size frequency windows.
    pub fn rabi_scale(&self) -> f64 {
        2.0 * self.coupling
    }

    pub fn is_uncoupled(&self) -> bool {
        self.coupling == 0.0
    }

    /// Unit-area lineshape ρ at offset x from the centre.
    pub(crate) fn profile(&self, x: f64) -> f64 {
        let w = self.width;
        match self.shape {
            Lineshape::Gaussian => self.norm * (-0.5 * (x / w).powi(2)).exp(),
            Lineshape::Lorentzian => self.norm / (1.0 + (x / w).powi(2)),
            Lineshape::QGaussian { q } => {
                self.norm * (1.0 + (q - 1.0) * (x / w).powi(2)).powf(-1.0 / (q - 1.0))
            }
        }
    }

    /// Density without holes at offset x from the centre.
    pub(crate) fn base_at_offset(&self, x: f64) -> f64 {
        TAU * self.coupling * self.coupling * self.profile(x)
    }

    /// J_s(ω) at absolute ω.
    pub fn density(&self, omega: f64) -> f64 {
        let base = self.base_at_offset(omega - self.center);
        if base == 0.0 {
            return 0.0;
        }
        let keep: f64 = self.holes.iter().map(|h| 1.0 - h.removed(omega)).product();
        base * keep
    }

    /// Fraction of the base lineshape weight lying at |x| > r.
    pub fn tail_fraction(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.shape {
            Lineshape::Gaussian => {
                // crude but monotone bound: exp(−z²/2) · 2/(z√(2π)) for z > 1
                let z = r / self.width;
                if z < 1.0 {
                    1.0
                } else {
                    (-0.5 * z * z).exp() * 2.0 / (z * TAU.sqrt())
                }
            }
            Lineshape::Lorentzian => 1.0 - 2.0 / PI * (r / self.width).atan(),
            Lineshape::QGaussian { q } => {
                2.0 * self.width * self.norm * q_tail_integral(q, (r / self.width).atan())
            }
        }
    }

    /// Default window: wide enough for the normal modes and for the line core.
    fn base_window(&self) -> f64 {
        (40.0 * self.rabi_scale()).max(60.0 * self.fwhm)
    }

    /// Half-width (offset) of the frequency window used by all spectral integrals.
    /// Heavy q-Gaussian tails push it out until the missing weight is below 1e-7
    /// (beyond the default window the panels grow geometrically, so this is cheap).
    pub(crate) fn window_half_width(&self) -> f64 {
        let w = self.base_window();
        match self.shape {
            Lineshape::Gaussian => w.min(12.0 * self.width),
            Lineshape::Lorentzian => w,
            Lineshape::QGaussian { .. } => {
                let cap = 1e7 * self.fwhm;
                let mut r = w;
                while r < cap && self.tail_fraction(r) > 1e-7 {
                    r *= 1.5;
                }
                r.min(cap)
            }
        }
    }

    /// Offset beyond which the base lineshape carries < 5e-9 of its weight, capped at the
    /// default window; panels are uniform inside and graded outside.
    fn resolved_core(&self) -> f64 {
        let w = self.base_window().min(self.window_half_width());
        match self.shape {
            Lineshape::Gaussian => (9.0 * self.width).min(w),
            Lineshape::Lorentzian => w,
            Lineshape::QGaussian { .. } => {
                let mut r = self.fwhm;
                while r < w && self.tail_fraction(r) > 5e-9 {
                    r *= 1.1;
                }
                r.min(w)
            }
        }
    }
}

/// ∫_{θ0}^{π/2} cos^{2p−2}θ / (cos²θ + (q−1) sin²θ)^p dθ, the q-Gaussian profile integral
/// after x = Δ tan θ, with p = 1/(q−1).
fn q_tail_integral(q: f64, theta0: f64) -> f64 {
    let b = q - 1.0;
    let p = 1.0 / b;
    // φ = π/2 − θ = L·s^m; m ≥ 1/(2p − 1) removes the φ^{2p−2} singularity for q > 2
    let len = PI / 2.0 - theta0;
    let m = (1.0 / (2.0 * p - 1.0)).ceil().max(1.0);
    let f = |x: f64| {
        let phi = len * x.powf(m);
        let (s, c) = phi.sin_cos();
        let smooth = if phi > 0.0 { (s / phi).powf(2.0 * p - 2.0) } else { 1.0 };
        let jac = len * m * x.powf(m - 1.0) * (len * x.powf(m)).powf(2.0 * p - 2.0);
        smooth * jac / (s * s + b * c * c).powf(p)
    };
    quadrature::double_exponential::integrate(f, 0.0, 1.0, 1e-15).integral
}

/// J_s(ω) at absolute ω.
pub fn evaluate_density(model: &SpectralModel, omega: f64) -> f64 {
    model.density(omega)
}

/// Cavity leakage and bath temperatures. κ is the amplitude decay rate (J_e = 2κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub kappa: f64,
    pub spin_temperature: f64,
    pub env_temperature: f64,
    /// Absolute cavity frequency, rad/µs.
    pub cavity_frequency: f64,
}

impl EnvironmentSpec {
    pub fn new(kappa: f64, spin_temperature: f64, env_temperature: f64, cavity_frequency: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Parameter(format!("κ must be non-negative, got {kappa}")));
        }
        if !(spin_temperature >= 0.0 && env_temperature >= 0.0)
            || !spin_temperature.is_finite()
            || !env_temperature.is_finite()
        {
            return Err(Error::Parameter("temperatures must be non-negative".into()));
        }
        if !(cavity_frequency > 0.0 && cavity_frequency.is_finite()) {
            return Err(Error::Parameter("cavity frequency must be positive".into()));
        }
        Ok(EnvironmentSpec { kappa, spin_temperature, env_temperature, cavity_frequency })
    }

    pub fn zero_temperature(&self) -> bool {
        self.spin_temperature == 0.0 && self.env_temperature == 0.0
    }

    /// Strength 2κ n̄(ω_c, T_e) of the white-noise leakage correlation.
    pub fn white_noise(&self) -> f64 {
        2.0 * self.kappa * bose_occupation(self.cavity_frequency, self.env_temperature).unwrap_or(0.0)
    }
}

/// Bose–Einstein occupation 1/(e^{ħω/k_BT} − 1).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("occupation needs ω > 0, got {omega}")));
    }
    if temperature < 0.0 || temperature.is_nan() {
        return Err(Error::Domain(format!("temperature must be non-negative, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR_OVER_KB_US * omega / temperature).exp_m1())
}

/// Frequency samples δ_k (rotating frame) with signed weights c_k so that
/// ∫dδ/2π J_s(ω_c+δ) F(δ) ≈ Σ c_k F(δ_k).
#[derive(Debug, Clone, Default)]
pub struct SpectralNodes {
    pub delta: Vec<f64>,
    pub weight: Vec<f64>,
}

impl SpectralNodes {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    fn push_measure(&mut self, m: &Measure, shift: f64, mut w: impl FnMut(f64) -> f64) {
        for (&x, &q) in m.nodes.iter().zip(&m.weights) {
            let c = q * w(x);
            if c != 0.0 {
                self.delta.push(x + shift);
                self.weight.push(c);
            }
        }
    }

    /// Σ c_k e^{−iδ_k t}.
    pub fn fourier(&self, t: f64) -> C64 {
        self.delta
            .iter()
            .zip(&self.weight)
            .map(|(&d, &c)| C64::from_polar(c, -d * t))
            .sum()
    }

    /// Σ c_k ∫₀ᵗ e^{−iδ_k s} ds.
    pub fn cumulative(&self, t: f64) -> C64 {
        self.delta
            .iter()
            .zip(&self.weight)
            .map(|(&d, &c)| c * t * phase_integral(d, t))
            .sum()
    }

    /// (Σ c_k e^{−iδ_k t_j}, Σ c_k ∫₀^{t_j} e^{−iδ_k s}ds) for t_j = j·dt, j = 0..=n.
    pub fn series(&self, dt: f64, n: usize) -> (Vec<C64>, Vec<C64>) {
        const CHUNK: usize = 256;
        let partials: Vec<(Vec<C64>, Vec<C64>)> = self
            .delta
            .par_chunks(CHUNK)
            .zip(self.weight.par_chunks(CHUNK))
            .map(|(ds, cs)| {
                let mut g = vec![C64::new(0.0, 0.0); n + 1];
                let mut big = vec![C64::new(0.0, 0.0); n + 1];
                for (&d, &c) in ds.iter().zip(cs) {
                    accumulate_node(d, c, dt, &mut g, &mut big);
                }
                (g, big)
            })
            .collect();
        let mut g = vec![C64::new(0.0, 0.0); n + 1];
        let mut big = vec![C64::new(0.0, 0.0); n + 1];
        // fixed-order reduction keeps the result independent of scheduling
        for (pg, pb) in partials {
            for j in 0..=n {
                g[j] += pg[j];
                big[j] += pb[j];
            }
        }
        (g, big)
    }
}

/// (1/t)∫₀ᵗ e^{−iδs}ds = e^{−iδt/2} sinc(δt/2).
pub(crate) fn phase_integral(delta: f64, t: f64) -> C64 {
    let h = 0.5 * delta * t;
    let sinc = if h.abs() < 1e-4 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    C64::from_polar(sinc, -h)
}

fn accumulate_node(d: f64, c: f64, dt: f64, g: &mut [C64], big: &mut [C64]) {
    const ANCHOR: usize = 64;
    let n = g.len() - 1;
    let small = (d * dt * n as f64).abs() < 1e-3;
    let step = C64::from_polar(1.0, -d * dt);
    // d_k = c/(iδ): ∫₀ᵗ e^{−iδs} = (1 − e^{−iδt})/(iδ)
    let dk = if small { C64::new(0.0, 0.0) } else { C64::new(0.0, -c / d) };
    let mut p = C64::new(1.0, 0.0);
    for j in 0..=n {
        if j % ANCHOR == 0 {
            p = C64::from_polar(1.0, -d * dt * j as f64);
        }
        g[j] += c * p;
        if small {
            let t = dt * j as f64;
            big[j] += c * t * phase_integral(d, t);
        } else {
            big[j] += dk * (C64::new(1.0, 0.0) - p);
        }
        p *= step;
    }
}

/// Closed-form Lorentzian contribution Ω²e^{−(λ+iδ_s)t}.
#[derive(Debug, Clone, Copy)]
struct ExpPart {
    amp: f64,
    rate: C64,
}

/// Evaluator for the spin memory kernel g(t) and its integral G(t) = ∫₀ᵗ g at any t ≥ 0.
#[derive(Debug, Clone)]
pub struct Kernel {
    nodes: SpectralNodes,
    analytic: Option<ExpPart>,
}

impl Kernel {
    /// Build the kernel quadrature for times up to `horizon`.
    pub fn new(model: &SpectralModel, env: &EnvironmentSpec, horizon: f64) -> Result<Self> {
        let t_res = resolution_horizon(horizon);
        let shift = model.center - env.cavity_frequency;
        let mut nodes = SpectralNodes::default();
        let mut analytic = None;
        if model.is_uncoupled() {
            return Ok(Kernel { nodes, analytic });
        }
        match model.shape {
            Lineshape::Lorentzian => {
                analytic = Some(ExpPart {
                    amp: model.coupling * model.coupling,
                    rate: C64::new(model.width, shift),
                });
            }
            _ => {
                let base = base_measure(model, t_res);
                nodes.push_measure(&base, shift, |x| model.base_at_offset(x) / TAU);
                let captured: f64 = nodes.weight.iter().sum::<f64>() / (model.coupling * model.coupling);
                if (1.0 - captured).abs() > TRUNCATION_TOLERANCE {
                    return Err(Error::Truncation { captured, tolerance: TRUNCATION_TOLERANCE });
                }
            }
        }
        push_holes(&mut nodes, model, shift, t_res, 1.0 / TAU, |_| 1.0);
        Ok(Kernel { nodes, analytic })
    }

    pub fn g(&self, t: f64) -> C64 {
        let mut v = self.nodes.fourier(t);
        if let Some(a) = self.analytic {
            v += a.amp * (-a.rate * t).exp();
        }
        v
    }

    pub fn cumulative(&self, t: f64) -> C64 {
        let mut v = self.nodes.cumulative(t);
        if let Some(a) = self.analytic {
            v += a.amp * (1.0 - (-a.rate * t).exp()) / a.rate;
        }
        v
    }

    /// (g, G) on t_j = j·dt, j = 0..=n.
    pub fn series(&self, dt: f64, n: usize) -> (Vec<C64>, Vec<C64>) {
        let (mut g, mut big) = self.nodes.series(dt, n);
        if let Some(a) = self.analytic {
            for j in 0..=n {
                let e = (-a.rate * (dt * j as f64)).exp();
                g[j] += a.amp * e;
                big[j] += a.amp * (1.0 - e) / a.rate;
            }
        }
        (g, big)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Kernel frequency resolution is tied to a horizon rounded up to a power of two µs, so
/// runs on [0, T] and [0, 2T] with T ≥ 1 µs share identical quadratures whenever they
/// round to the same value.
pub fn resolution_horizon(horizon: f64) -> f64 {
    2f64.powi(horizon.max(1.0).log2().ceil() as i32)
}

/// Panel width keeping the phase e^{−iδt} resolved for t ≤ t_res with 16-point panels.
fn oscillation_width(t_res: f64) -> f64 {
    12.0 / t_res
}

/// Base-lineshape measure in offset coordinates.
fn base_measure(model: &SpectralModel, t_res: f64) -> Measure {
    let w = model.window_half_width();
    let width = (model.fwhm / 8.0).min(oscillation_width(t_res));
    Measure::from_panels(&graded_panels(model.resolved_core(), w, width, 1.25), gl16())
}

/// Append the (negative) weight removed by each hole, scaled by `scale · f(δ)`.
fn push_holes(
    nodes: &mut SpectralNodes,
    model: &SpectralModel,
    shift: f64,
    t_res: f64,
    scale: f64,
    mut f: impl FnMut(f64) -> f64,
) {
    for h in &model.holes {
        let (a, b) = h.window();
        let width = (0.25 * h.half_width).min(oscillation_width(t_res));
        let m = Measure::from_panels(&uniform_panels(a - model.center, b - model.center, width), gl16());
        nodes.push_measure(&m, shift, |x| {
            -scale * model.base_at_offset(x) * h.removed(x + model.center) * f(x + shift)
        });
    }
}

/// Thermally weighted nodes: c_k = w_k J_s n̄(ω_c+δ_k, T_s)/2π, on a window trimmed to
/// where |φ_δ|² ~ 1/δ² still matters.
pub fn thermal_nodes(model: &SpectralModel, env: &EnvironmentSpec, horizon: f64) -> SpectralNodes {
    let mut nodes = SpectralNodes::default();
    if model.is_uncoupled() || env.spin_temperature == 0.0 {
        return nodes;
    }
    let t_res = resolution_horizon(horizon);
    let shift = model.center - env.cavity_frequency;
    let r = model
        .window_half_width()
        .min((15.0 * model.fwhm).max(10.0 * model.rabi_scale()));
    let width = (model.fwhm / 8.0).min(oscillation_width(t_res));
    let m = Measure::from_panels(&uniform_panels(-r, r, width), gl16());
    let occ = |d: f64| bose_occupation(env.cavity_frequency + d, env.spin_temperature).unwrap_or(0.0);
    nodes.push_measure(&m, shift, |x| model.base_at_offset(x) / TAU * occ(x + shift));
    push_holes(&mut nodes, model, shift, t_res, 1.0 / TAU, occ);
    nodes
}

/// Kernel series on a time grid. The κ part of g is local and kept out of `g`; the
/// leakage noise is white with strength `white_noise` (g̃_e(t) = white_noise·δ(t)).
#[derive(Debug, Clone)]
pub struct MemoryKernels {
    pub dt: f64,
    pub g: Vec<C64>,
    /// G(t) = ∫₀ᵗ g.
    pub cumulative: Vec<C64>,
    /// Spin part of g̃.
    pub thermal: Vec<C64>,
    pub white_noise: f64,
}

pub fn memory_kernels(model: &SpectralModel, env: &EnvironmentSpec, grid: &TimeGrid) -> Result<MemoryKernels> {
    let kernel = Kernel::new(model, env, grid.horizon())?;
    let (g, cumulative) = kernel.series(grid.dt, grid.steps);
    let thermal = if env.spin_temperature == 0.0 {
        vec![C64::new(0.0, 0.0); grid.steps + 1]
    } else {
        thermal_nodes(model, env, grid.horizon()).series(grid.dt, grid.steps).0
    };
    Ok(MemoryKernels { dt: grid.dt, g, cumulative, thermal, white_noise: env.white_noise() })
}

/// Principal-value self-energy Δ(ω) = PV∫dω′/2π J_s(ω′)/(ω − ω′) by singularity
/// subtraction, with the boundary log terms done analytically.
#[derive(Debug, Clone)]
pub struct PvQuadrature {
    center: f64,
    window: f64,
    base: Measure,
    base_j: Vec<f64>,
    holes: Vec<(HoleSpec, Measure, Vec<f64>)>,
    model: SpectralModel,
}

impl PvQuadrature {
    pub fn new(model: &SpectralModel) -> Self {
        let w = model.window_half_width();
        let core = (12.0 * model.fwhm).min(w);
        let base = if model.is_uncoupled() {
            Measure::default()
        } else {
            Measure::from_panels(&graded_panels(core, w, model.fwhm / 16.0, 1.15), gl16())
        };
        let base_j = base.nodes.iter().map(|&x| model.base_at_offset(x)).collect();
        let holes = model
            .holes
            .iter()
            .map(|h| {
                let (a, b) = h.window();
                let m = Measure::from_panels(
                    &uniform_panels(a - model.center, b - model.center, 0.25 * h.half_width),
                    gl16(),
                );
                let j = m.nodes.iter().map(|&x| model.base_at_offset(x) * h.removed(x + model.center)).collect();
                (*h, m, j)
            })
            .collect();
        PvQuadrature { center: model.center, window: w, base, base_j, holes, model: model.clone() }
    }

    /// Δ at absolute ω and whether ω sits on a rectangular hole edge (where the log term
    /// diverges; the returned value then omits it).
    pub fn delta(&self, omega: f64) -> (f64, bool) {
        if self.model.is_uncoupled() {
            return (0.0, false);
        }
        let x = omega - self.center;
        let jx = self.model.base_at_offset(x);
        let mut s = subtracted_sum(&self.base, &self.base_j, x, jx);
        s += jx * ((x + self.window) / (x - self.window)).abs().ln();
        let mut edge = false;
        for (h, m, j) in &self.holes {
            let (a, b) = h.window();
            let (a, b) = (a - self.center, b - self.center);
            let jh = jx * h.removed(omega);
            s -= subtracted_sum(m, j, x, jh);
            let tol = 1e-12 * (1.0 + x.abs());
            if (x - a).abs() < tol || (x - b).abs() < tol {
                edge = h.profile == HoleProfile::Rectangular;
                // inside-edge value jh = jx; the log diverges there, drop it
                continue;
            }
            s -= jh * ((x - a) / (x - b)).abs().ln();
        }
        (s / TAU, edge)
    }
}

fn subtracted_sum(m: &Measure, j: &[f64], x: f64, jx: f64) -> f64 {
    m.nodes
        .iter()
        .zip(&m.weights)
        .zip(j)
        .map(|((&s, &w), &js)| {
            let d = x - s;
            if d == 0.0 {
                0.0
            } else {
                w * (js - jx) / d
            }
        })
        .sum()
}
