// SPDX-License-Identifier: Apache-2.0

//! Mean field, intensities and one- and two-time correlation functions of the cavity.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::propagator_time::Propagators;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCavityState {
    Vacuum,
    Coherent { re: f64, im: f64 },
    Thermal { mean_photons: f64 },
}

impl InitialCavityState {
    pub fn coherent(alpha: C64) -> Self {
        InitialCavityState::Coherent { re: alpha.re, im: alpha.im }
    }

    /// ⟨a(0)⟩.
    pub fn mean(&self) -> C64 {
        match *self {
            InitialCavityState::Coherent { re, im } => C64::new(re, im),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// ⟨a†a(0)⟩.
    pub fn photons(&self) -> f64 {
        match *self {
            InitialCavityState::Vacuum => 0.0,
            InitialCavityState::Coherent { re, im } => re * re + im * im,
            InitialCavityState::Thermal { mean_photons } => mean_photons,
        }
    }

    /// ⟨a†a⟩₀ − |⟨a⟩₀|², the initial-state fluctuation.
    pub fn excess(&self) -> f64 {
        match *self {
            InitialCavityState::Thermal { mean_photons } => mean_photons,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialCavityState::Thermal { mean_photons } if !(mean_photons >= 0.0 && mean_photons.is_finite()) => {
                Err(Error::Parameter(format!("thermal occupation must be non-negative, got {mean_photons}")))
            }
            InitialCavityState::Coherent { re, im } if !(re.is_finite() && im.is_finite()) => {
                Err(Error::Parameter("coherent amplitude must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// ⟨a(t)⟩ = u⟨a(0)⟩ + y.
pub fn mean_field(props: &Propagators, init: &InitialCavityState) -> Vec<C64> {
    let a0 = init.mean();
    props.u.iter().zip(&props.y).map(|(&u, &y)| u * a0 + y).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Intensity {
    /// ⟨a†a⟩(t).
    pub n: Vec<f64>,
    /// Semiclassical part |⟨a(t)⟩|².
    pub n_sc: Vec<f64>,
    /// n − n_sc = v(t,t) + |u|²(⟨a†a⟩₀ − |⟨a⟩₀|²).
    pub fluctuation: Vec<f64>,
}

pub fn intensity(props: &Propagators, init: &InitialCavityState) -> Intensity {
    let a0 = init.mean();
    let (n0, ex) = (init.photons(), init.excess());
    let mut out = Intensity { n: Vec::new(), n_sc: Vec::new(), fluctuation: Vec::new() };
    for i in 0..props.u.len() {
        let (u, y, v) = (props.u[i], props.y[i], props.v_diag[i]);
        let n = u.norm_sqr() * n0 + 2.0 * (u.conj() * y * a0.conj()).re + y.norm_sqr() + v;
        out.n.push(n);
        out.n_sc.push((u * a0 + y).norm_sqr());
        out.fluctuation.push(v + u.norm_sqr() * ex);
    }
    out
}

/// Two-time observables on t_i = t_index[i]·dt, τ_j = tau_index[j]·dt.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationGrid {
    pub times: Vec<f64>,
    pub delays: Vec<f64>,
    /// ⟨a†(t)a(t+τ)⟩.
    pub correlation: Vec<Vec<C64>>,
    /// g⁽¹⁾(t,t+τ); `None` where n(t)·n(t+τ) = 0.
    pub g1: Vec<Vec<Option<C64>>>,
    /// g⁽²⁾(t,t+τ); `None` where n(t)·n(t+τ) = 0.
    pub g2: Vec<Vec<Option<f64>>>,
    /// ⟨δa†(t)δa(t+τ)⟩ = v(t+τ,t) + u*(t)u(t+τ)(⟨a†a⟩₀ − |⟨a⟩₀|²).
    pub quantum: Vec<Vec<C64>>,
}

impl CorrelationGrid {
    pub fn compute(
        props: &Propagators,
        init: &InitialCavityState,
        t_index: &[usize],
        tau_index: &[usize],
    ) -> Result<Self> {
        let last = props.u.len() - 1;
        let max_t = t_index.iter().max().copied().unwrap_or(0);
        let max_tau = tau_index.iter().max().copied().unwrap_or(0);
        if max_t + max_tau > last {
            return Err(Error::Range(format!(
                "t + τ reaches step {} but the propagators stop at step {last}",
                max_t + max_tau
            )));
        }
        let mut later: Vec<usize> = t_index.iter().flat_map(|&t| tau_index.iter().map(move |&s| t + s)).collect();
        later.sort_unstable();
        later.dedup();
        let v = props.noise.entries(&later, t_index);
        let row_of = |k: usize| later.binary_search(&k).expect("index collected above");

        let m = mean_field(props, init);
        let inten = intensity(props, init);
        let (n0, ex, a0) = (init.photons(), init.excess(), init.mean());
        let dt = props.grid.dt;
        let mut grid = CorrelationGrid {
            times: t_index.iter().map(|&i| i as f64 * dt).collect(),
            delays: tau_index.iter().map(|&j| j as f64 * dt).collect(),
            correlation: Vec::new(),
            g1: Vec::new(),
            g2: Vec::new(),
            quantum: Vec::new(),
        };
        for (b, &i) in t_index.iter().enumerate() {
            let (mut c_row, mut g1_row, mut g2_row, mut q_row) = (vec![], vec![], vec![], vec![]);
            for &s in tau_index {
                let k = i + s;
                let vv = v[row_of(k)][b];
                let (ui, uk, yi, yk) = (props.u[i], props.u[k], props.y[i], props.y[k]);
                let corr = ui.conj() * uk * n0 + yi.conj() * yk + vv + ui.conj() * yk * a0.conj() + yi.conj() * uk * a0;
                let quantum = vv + ui.conj() * uk * ex;
                let norm = inten.n[i] * inten.n[k];
                let defined = norm > 0.0 && inten.n[i] > 0.0;
                g1_row.push(defined.then(|| corr / norm.sqrt()));
                // Gaussian state, no anomalous moments:
                // ⟨a†a†′a′a⟩ = n n′ + |X|² + 2Re[m conj(m′) X], X = ⟨δa†(t)δa(t+τ)⟩
                let num = norm + quantum.norm_sqr() + 2.0 * (m[i] * m[k].conj() * quantum).re;
                g2_row.push(defined.then(|| num / norm));
                c_row.push(corr);
                q_row.push(quantum);
            }
            grid.correlation.push(c_row);
            grid.g1.push(g1_row);
            grid.g2.push(g2_row);
            grid.quantum.push(q_row);
        }
        Ok(grid)
    }
}

pub fn first_order_correlation(
    props: &Propagators,
    init: &InitialCavityState,
    t_index: &[usize],
    tau_index: &[usize],
) -> Result<CorrelationGrid> {
    CorrelationGrid::compute(props, init, t_index, tau_index)
}

pub fn second_order_correlation(
    props: &Propagators,
    init: &InitialCavityState,
    t_index: &[usize],
    tau_index: &[usize],
) -> Result<Vec<Vec<Option<f64>>>> {
    Ok(CorrelationGrid::compute(props, init, t_index, tau_index)?.g2)
}

pub fn quantum_correlation(
    props: &Propagators,
    init: &InitialCavityState,
    t_index: &[usize],
    tau_index: &[usize],
) -> Result<Vec<Vec<C64>>> {
    Ok(CorrelationGrid::compute(props, init, t_index, tau_index)?.quantum)
}
