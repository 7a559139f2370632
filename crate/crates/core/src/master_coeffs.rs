// SPDX-License-Identifier: Apache-2.0

//! Coefficients of the exact master equation and Markovian/non-Markovian classification.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::propagator_time::Propagators;

/// |u| below this marks an instant where u̇/u is singular.
pub const SINGULAR_U: f64 = 1e-6;
/// Coefficient values are clamped to ±this at singular instants, µs⁻¹.
pub const GAMMA_MAX: f64 = 1e6;

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientSeries {
    pub times: Vec<f64>,
    /// γ(t) = −Re[u̇/u].
    pub gamma: Vec<f64>,
    /// Rotating-frame shift δω′(t) = ω′_c(t) − ω_c = −Im[u̇/u].
    pub shift: Vec<f64>,
    pub cavity_frequency: f64,
    /// f̃′(t) = iẏ − i(u̇/u)y.
    pub drive: Vec<C64>,
    /// γ̃(t) = d/dt v(t,t) − [(u̇/u)v(t,t) + c.c.].
    pub fluctuation: Vec<f64>,
    pub singular: Vec<bool>,
}

impl CoefficientSeries {
    /// Absolute renormalized cavity frequency ω′_c(t).
    pub fn renormalized_frequency(&self, i: usize) -> f64 {
        self.cavity_frequency + self.shift[i]
    }

    /// Integrate du/dt = −(iδω′ + γ)u from u(0) = 1 with a fourth-order rule.
    pub fn reconstruct_u(&self) -> Vec<C64> {
        let n = self.times.len() - 1;
        let c: Vec<C64> = self.gamma.iter().zip(&self.shift).map(|(&g, &s)| -C64::new(g, s)).collect();
        let mut out = vec![C64::new(1.0, 0.0); n + 1];
        let mut log = C64::new(0.0, 0.0);
        for k in 0..n {
            let h = self.times[k + 1] - self.times[k];
            let inc = if n < 3 {
                0.5 * h * (c[k] + c[k + 1])
            } else if k == 0 {
                h / 24.0 * (9.0 * c[0] + 19.0 * c[1] - 5.0 * c[2] + c[3])
            } else if k == n - 1 {
                h / 24.0 * (c[n - 3] - 5.0 * c[n - 2] + 19.0 * c[n - 1] + 9.0 * c[n])
            } else {
                h / 24.0 * (-c[k - 1] + 13.0 * c[k] + 13.0 * c[k + 1] - c[k + 2])
            };
            log += inc;
            out[k + 1] = log.exp();
        }
        out
    }
}

fn clamp(x: f64) -> f64 {
    x.clamp(-GAMMA_MAX, GAMMA_MAX)
}

pub fn coefficients(props: &Propagators, cavity_frequency: f64) -> CoefficientSeries {
    let n = props.u.len();
    let mut out = CoefficientSeries {
        times: props.grid.times(),
        gamma: Vec::with_capacity(n),
        shift: Vec::with_capacity(n),
        cavity_frequency,
        drive: Vec::with_capacity(n),
        fluctuation: Vec::with_capacity(n),
        singular: Vec::with_capacity(n),
    };
    for i in 0..n {
        let u = props.u[i];
        let singular = u.norm() < SINGULAR_U;
        let r = props.udot[i] / u;
        let r = if r.is_finite() { C64::new(clamp(r.re), clamp(r.im)) } else { C64::new(-GAMMA_MAX, 0.0) };
        out.gamma.push(-r.re);
        out.shift.push(-r.im);
        let f = C64::new(0.0, 1.0) * (props.ydot[i] - r * props.y[i]);
        out.drive.push(C64::new(clamp(f.re), clamp(f.im)));
        out.fluctuation.push(clamp(props.v_diag_rate[i] - 2.0 * r.re * props.v_diag[i]));
        out.singular.push(singular);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// Sign changes of γ over the whole horizon (singular instants skipped).
    pub sign_changes: usize,
    /// Sign changes within the first 0.5 µs.
    pub early_sign_changes: usize,
    /// Trailing-window mean of γ, when γ never changes sign.
    pub asymptote: Option<f64>,
    /// Relative change between the last two tenths of the horizon.
    pub drift: Option<f64>,
    pub markovian: bool,
    pub inconclusive: bool,
}

pub fn classify_regime(coeffs: &CoefficientSeries) -> RegimeReport {
    let t_end = *coeffs.times.last().unwrap_or(&0.0);
    let regular: Vec<(f64, f64)> = coeffs
        .times
        .iter()
        .zip(&coeffs.gamma)
        .zip(&coeffs.singular)
        .filter(|(_, &s)| !s)
        .map(|((&t, &g), _)| (t, g))
        .collect();
    let count = |limit: f64| {
        let mut last = 0.0f64;
        let mut changes = 0;
        for &(_, g) in regular.iter().filter(|(t, _)| *t <= limit) {
            if g != 0.0 {
                if last != 0.0 && g.signum() != last.signum() {
                    changes += 1;
                }
                last = g;
            }
        }
        changes
    };
    let sign_changes = count(f64::INFINITY);
    let early_sign_changes = count(0.5);
    let mean = |a: f64, b: f64| {
        let v: Vec<f64> = regular.iter().filter(|(t, _)| *t >= a && *t <= b).map(|p| p.1).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let inconclusive_horizon = t_end < 1.0 - 1e-9;
    let (asymptote, drift) = if sign_changes == 0 && !inconclusive_horizon {
        let asym = mean(0.8 * t_end, t_end);
        let drift = match (mean(0.9 * t_end, t_end), mean(0.8 * t_end, 0.9 * t_end), asym) {
            (Some(a), Some(b), Some(m)) if m != 0.0 => Some(((a - b) / m).abs()),
            _ => None,
        };
        (asym, drift)
    } else {
        (None, None)
    };
    let inconclusive = inconclusive_horizon || (sign_changes == 0 && drift.is_none());
    let markovian = !inconclusive && sign_changes == 0 && drift.is_some_and(|d| d < 0.01);
    RegimeReport { sign_changes, early_sign_changes, asymptote, drift, markovian, inconclusive }
}
