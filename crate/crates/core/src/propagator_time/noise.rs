// SPDX-License-Identifier: Apache-2.0

//! Noise correlation ṽ(τ,t) = ∫∫ũ(τ−t₁)g̃(t₁−t₂)conj ũ(t−t₂). The spin part is evaluated
//! spectrally, ṽ_s = Σ_k c_k n̄_k φ_k(τ) conj φ_k(t) with φ_δ(t) = e^{−iδt}∫₀ᵗũ(s)e^{iδs}ds;
//! the leakage channel is white noise, ṽ_e = W∫₀^{min(τ,t)} ũ(τ−s) conj ũ(t−s) ds.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::interp::{cell_moments, Hermite};
use super::TimeGrid;
use crate::quad::{gl4, gregory_weights};
use crate::spectral::{thermal_nodes, EnvironmentSpec, MemoryKernels, SpectralModel, SpectralNodes};

const CHUNK: usize = 128;

/// Everything needed to evaluate ṽ at arbitrary grid points.
#[derive(Debug, Clone)]
pub struct ThermalNoise {
    u: Vec<C64>,
    udot: Vec<C64>,
    dt: f64,
    nodes: SpectralNodes,
    white: f64,
}

/// ṽ on the strided mesh (indices into the grid) plus the full-resolution diagonal.
#[derive(Debug, Clone, Serialize)]
pub struct VMesh {
    pub stride: usize,
    pub indices: Vec<usize>,
    /// data[i][j] = ṽ(t_{indices[i]}, t_{indices[j]}).
    pub data: Vec<Vec<C64>>,
    pub diag: Vec<f64>,
}

impl ThermalNoise {
    pub fn new(u: &[C64], udot: &[C64], model: &SpectralModel, env: &EnvironmentSpec, grid: &TimeGrid) -> Self {
        ThermalNoise {
            u: u.to_vec(),
            udot: udot.to_vec(),
            dt: grid.dt,
            nodes: thermal_nodes(model, env, grid.horizon()),
            white: env.white_noise(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.nodes.is_empty() && self.white == 0.0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn herm(&self) -> Hermite<'_> {
        Hermite::new(&self.u, &self.udot, self.dt)
    }

    /// Runs the cumulative transform F_δ(t_n) for one node, calling `visit(n, F, e^{iδt_n})`.
    fn sweep(&self, delta: f64, last: usize, mut visit: impl FnMut(usize, C64, C64)) {
        let herm = self.herm();
        let h = self.dt;
        let m = cell_moments(delta * h);
        let step = C64::from_polar(1.0, delta * h);
        let mut phase = C64::new(1.0, 0.0);
        let mut f = C64::new(0.0, 0.0);
        visit(0, f, phase);
        for n in 0..last {
            if n % 64 == 0 {
                phase = C64::from_polar(1.0, delta * h * n as f64);
            }
            let c = herm.cell(n);
            f += phase * h * (c[0] * m[0] + c[1] * m[1] + c[2] * m[2] + c[3] * m[3]);
            phase *= step;
            if (n + 1) % 64 == 0 {
                phase = C64::from_polar(1.0, delta * h * (n + 1) as f64);
            }
            visit(n + 1, f, phase);
        }
    }

    /// (ṽ(t,t), dṽ(t,t)/dt) on the full grid. The rate follows from ∂_τφ_δ(τ) =
    /// −iδφ_δ(τ) + ũ(τ), so d/dt ṽ_s(t,t) = 2Re[ũ(t) Σ_k c_k conj φ_k(t)].
    pub fn diagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.u.len() - 1;
        let partials: Vec<(Vec<f64>, Vec<C64>)> = self
            .nodes
            .delta
            .par_chunks(CHUNK)
            .zip(self.nodes.weight.par_chunks(CHUNK))
            .map(|(ds, cs)| {
                let mut v = vec![0.0; n + 1];
                let mut s = vec![C64::new(0.0, 0.0); n + 1];
                for (&d, &c) in ds.iter().zip(cs) {
                    self.sweep(d, n, |j, f, ph| {
                        v[j] += c * f.norm_sqr();
                        s[j] += c * ph * f.conj();
                    });
                }
                (v, s)
            })
            .collect();
        let mut v = vec![0.0; n + 1];
        let mut rate = vec![0.0; n + 1];
        let mut s = vec![C64::new(0.0, 0.0); n + 1];
        for (pv, ps) in partials {
            for j in 0..=n {
                v[j] += pv[j];
                s[j] += ps[j];
            }
        }
        for j in 0..=n {
            rate[j] = 2.0 * (self.u[j] * s[j]).re;
        }
        if self.white != 0.0 {
            let lag0 = self.lag_integral(0, n);
            for j in 0..=n {
                v[j] += self.white * lag0[j].re;
                rate[j] += self.white * self.u[j].norm_sqr();
            }
        }
        (v, rate)
    }

    /// C_L(t_m) = ∫₀^{t_m} ũ(r + L·dt) conj ũ(r) dr for m = 0..=last.
    fn lag_integral(&self, lag: usize, last: usize) -> Vec<C64> {
        let herm = self.herm();
        let rule = gl4();
        let h = self.dt;
        let mut out = Vec::with_capacity(last + 1);
        let mut acc = C64::new(0.0, 0.0);
        out.push(acc);
        for n in 0..last {
            let mut cell = C64::new(0.0, 0.0);
            for (&x, &w) in rule.x.iter().zip(&rule.w) {
                let r = (n as f64 + 0.5 * (x + 1.0)) * h;
                cell += 0.5 * w * h * herm.at(r + lag as f64 * h) * herm.at(r).conj();
            }
            acc += cell;
            out.push(acc);
        }
        out
    }

    /// ṽ(t_r, t_c) for every r in `rows`, c in `cols`.
    pub fn entries(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(0.0, 0.0); cols.len()]; rows.len()];
        let mut all: Vec<usize> = rows.iter().chain(cols).copied().collect();
        all.sort_unstable();
        all.dedup();
        let Some(&last) = all.last() else { return out };
        assert!(last < self.u.len(), "requested time index beyond the solved horizon");
        let pos: BTreeMap<usize, usize> = all.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let ri: Vec<usize> = rows.iter().map(|r| pos[r]).collect();
        let ci: Vec<usize> = cols.iter().map(|c| pos[c]).collect();

        if !self.nodes.is_empty() {
            let partials: Vec<Vec<Vec<C64>>> = self
                .nodes
                .delta
                .par_chunks(CHUNK)
                .zip(self.nodes.weight.par_chunks(CHUNK))
                .map(|(ds, cs)| {
                    // phi[k][i] = φ_k(t_{all[i]})
                    let phi: Vec<Vec<C64>> = ds
                        .iter()
                        .map(|&d| {
                            let mut row = vec![C64::new(0.0, 0.0); all.len()];
                            self.sweep(d, last, |j, f, ph| {
                                if let Some(&i) = pos.get(&j) {
                                    row[i] = f * ph.conj();
                                }
                            });
                            row
                        })
                        .collect();
                    let mut part = vec![vec![C64::new(0.0, 0.0); ci.len()]; ri.len()];
                    for (k, &c) in cs.iter().enumerate() {
                        let p = &phi[k];
                        for (a, &r) in ri.iter().enumerate() {
                            let pr = c * p[r];
                            for (b, &cc) in ci.iter().enumerate() {
                                part[a][b] += pr * p[cc].conj();
                            }
                        }
                    }
                    part
                })
                .collect();
            for part in partials {
                for (o, p) in out.iter_mut().zip(part) {
                    for (x, y) in o.iter_mut().zip(p) {
                        *x += y;
                    }
                }
            }
        }

        if self.white != 0.0 {
            let mut lags: BTreeMap<usize, usize> = BTreeMap::new();
            for &r in rows {
                for &c in cols {
                    let (lag, m) = if r >= c { (r - c, c) } else { (c - r, r) };
                    let e = lags.entry(lag).or_insert(0);
                    *e = (*e).max(m);
                }
            }
            let tables: BTreeMap<usize, Vec<C64>> =
                lags.into_iter().map(|(lag, m)| (lag, self.lag_integral(lag, m))).collect();
            for (a, &r) in rows.iter().enumerate() {
                for (b, &c) in cols.iter().enumerate() {
                    let v = if r >= c { tables[&(r - c)][c] } else { tables[&(c - r)][r].conj() };
                    out[a][b] += self.white * v;
                }
            }
        }
        out
    }

    pub fn mesh(&self, stride: usize) -> VMesh {
        let n = self.u.len() - 1;
        let mut indices: Vec<usize> = (0..=n).step_by(stride.max(1)).collect();
        if *indices.last().unwrap() != n {
            indices.push(n);
        }
        let data = self.entries(&indices, &indices);
        VMesh { stride, indices, data, diag: self.diagonal().0 }
    }
}

/// ṽ on the strided mesh of `grid` plus its full diagonal.
pub fn solve_v(u: &[C64], udot: &[C64], model: &SpectralModel, env: &EnvironmentSpec, grid: &TimeGrid) -> VMesh {
    ThermalNoise::new(u, udot, model, env, grid).mesh(grid.v_stride)
}

/// Direct double convolution on the grid with fourth-order weights, using the tabulated
/// thermal kernel (g̃(−s) = conj g̃(s)). O(a·b) per entry; meant for cross-checks.
pub fn solve_v_time_domain(u: &[C64], kernels: &MemoryKernels, pairs: &[(usize, usize)]) -> Vec<C64> {
    let dt = kernels.dt;
    let gt = |m: isize| {
        if m >= 0 {
            kernels.thermal[m as usize]
        } else {
            kernels.thermal[(-m) as usize].conj()
        }
    };
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let (wa, wb) = (gregory_weights(a), gregory_weights(b));
            let mut s = C64::new(0.0, 0.0);
            for i in 0..=a {
                let mut inner = C64::new(0.0, 0.0);
                for j in 0..=b {
                    inner += wb[j] * gt(i as isize - j as isize) * u[b - j].conj();
                }
                s += wa[i] * u[a - i] * inner;
            }
            let mut v = s * dt * dt;
            if kernels.white_noise != 0.0 {
                let m = a.min(b);
                let w = gregory_weights(m);
                let e: C64 = (0..=m).map(|k| w[k] * u[a - k] * u[b - k].conj()).sum();
                v += kernels.white_noise * dt * e;
            }
            v
        })
        .collect()
}
