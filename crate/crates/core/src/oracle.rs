// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference: the cavity coupled to a finite set of bath modes, evolved
//! exactly with matrix exponentials in the one-excitation (linear) sector.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::drive::DriveSpec;
use crate::observables::InitialCavityState;
use crate::propagator_time::TimeGrid;
use crate::quad::gregory_weights;
use crate::spectral::{bose_occupation, EnvironmentSpec, SpectralModel};

/// Modes at rotating-frame detunings δ_k with couplings V_k and thermal occupations n̄_k.
#[derive(Debug, Clone)]
pub struct DiscreteBath {
    pub detuning: Vec<f64>,
    pub coupling: Vec<f64>,
    pub occupation: Vec<f64>,
}

impl DiscreteBath {
    /// K equally spaced modes around the ensemble centre, spacing 2π/recurrence, with
    /// V_k² = J_s(ω_k)Δω/2π (midpoint rule).
    pub fn sample(model: &SpectralModel, env: &EnvironmentSpec, modes: usize, recurrence: f64) -> Self {
        let dw = std::f64::consts::TAU / recurrence;
        let shift = model.center() - env.cavity_frequency;
        let mut bath = DiscreteBath { detuning: vec![], coupling: vec![], occupation: vec![] };
        for k in 0..modes {
            let d = shift + (k as f64 - 0.5 * (modes as f64 - 1.0)) * dw;
            let w = env.cavity_frequency + d;
            bath.detuning.push(d);
            bath.coupling.push((model.density(w) * dw / std::f64::consts::TAU).sqrt());
            bath.occupation.push(bose_occupation(w, env.spin_temperature).unwrap_or(0.0));
        }
        bath
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }

    /// Generator of (a, b_1..b_K): ȧ = −κa − iΣV_k b_k, ḃ_k = −iδ_k b_k − iV_k a.
    fn generator(&self, kappa: f64) -> DMatrix<C64> {
        let k = self.len();
        let mut m = DMatrix::from_element(k + 1, k + 1, C64::new(0.0, 0.0));
        m[(0, 0)] = C64::new(-kappa, 0.0);
        for i in 0..k {
            m[(0, i + 1)] = C64::new(0.0, -self.coupling[i]);
            m[(i + 1, 0)] = C64::new(0.0, -self.coupling[i]);
            m[(i + 1, i + 1)] = C64::new(0.0, -self.detuning[i]);
        }
        m
    }
}

/// Reference series: `rows[n]` is row 0 of exp(M t_n), so u = rows[n][0].
#[derive(Debug, Clone)]
pub struct OracleSeries {
    pub dt: f64,
    pub u: Vec<C64>,
    pub y: Vec<C64>,
    pub rows: Vec<Vec<C64>>,
    pub occupation: Vec<f64>,
    pub white_noise: f64,
}

pub fn oracle_propagators(bath: &DiscreteBath, env: &EnvironmentSpec, drive: &DriveSpec, grid: &TimeGrid) -> OracleSeries {
    let m = bath.generator(env.kappa);
    let dim = m.nrows();
    let step = (&m * C64::new(grid.dt, 0.0)).exp();
    let mut rows = Vec::with_capacity(grid.steps + 1);
    let mut row = DMatrix::from_fn(1, dim, |_, j| if j == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    for _ in 0..=grid.steps {
        rows.push(row.iter().copied().collect::<Vec<_>>());
        row = &row * &step;
    }
    let u = rows.iter().map(|r| r[0]).collect();
    let y = driven_mean(&m, drive, env.cavity_frequency, grid);
    OracleSeries { dt: grid.dt, u, y, rows, occupation: bath.occupation.clone(), white_noise: env.white_noise() }
}

/// Mean amplitudes under the drive, each exponential piece carried by an auxiliary
/// oscillator z (ż = −iνz) so every step is an exact exponential.
fn driven_mean(m: &DMatrix<C64>, drive: &DriveSpec, cavity: f64, grid: &TimeGrid) -> Vec<C64> {
    let dim = m.nrows();
    let mut y = vec![C64::new(0.0, 0.0); grid.steps + 1];
    for p in drive.pieces(cavity) {
        let mut aug = DMatrix::from_element(dim + 1, dim + 1, C64::new(0.0, 0.0));
        aug.view_mut((0, 0), (dim, dim)).copy_from(m);
        aug[(0, dim)] = C64::new(0.0, -1.0);
        aug[(dim, dim)] = C64::new(0.0, -p.nu);
        let off = {
            let mut a = aug.clone();
            a[(0, dim)] = C64::new(0.0, 0.0);
            a
        };
        let prop = |gen: &DMatrix<C64>, tau: f64| (gen * C64::new(tau, 0.0)).exp();
        let (on_step, off_step) = (prop(&aug, grid.dt), prop(&off, grid.dt));
        let mut state = nalgebra::DVector::from_element(dim + 1, C64::new(0.0, 0.0));
        let mut t = 0.0;
        let mut started = false;
        #[allow(clippy::needless_range_loop)] // y is written at n and read through `state`
        for n in 1..=grid.steps {
            let t_next = grid.time(n);
            // advance from t to t_next, splitting at the piece boundaries
            let mut cuts = vec![t];
            for e in [p.start, p.end] {
                if e > t && e < t_next {
                    cuts.push(e);
                }
            }
            cuts.push(t_next);
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if !started && a >= p.start {
                    started = true;
                    state[dim] = p.amplitude * C64::from_polar(1.0, -p.nu * p.start);
                }
                let active = started && a < p.end;
                let full = (b - a - grid.dt).abs() < 1e-15;
                state = match (active, full) {
                    (true, true) => &on_step * &state,
                    (false, true) => &off_step * &state,
                    (true, false) => prop(&aug, b - a) * &state,
                    (false, false) => prop(&off, b - a) * &state,
                };
            }
            y[n] += state[0];
            t = t_next;
        }
    }
    y
}

impl OracleSeries {
    /// v(t_a, t_b) = Σ_k n̄_k R_{0k}(t_a) conj R_{0k}(t_b) plus the white leakage term.
    pub fn v(&self, a: usize, b: usize) -> C64 {
        let (ra, rb) = (&self.rows[a], &self.rows[b]);
        let mut s: C64 = (0..self.occupation.len()).map(|k| self.occupation[k] * ra[k + 1] * rb[k + 1].conj()).sum();
        if self.white_noise != 0.0 {
            let m = a.min(b);
            let w = gregory_weights(m);
            let e: C64 = (0..=m).map(|j| w[j] * self.u[a - j] * self.u[b - j].conj()).sum();
            s += self.white_noise * self.dt * e;
        }
        s
    }

    /// Operator expansion a(t) = m(t) + Σ_j c_j(t) b_j over independent thermal modes
    /// b_0 = cavity fluctuation, b_k = bath modes. Returns (c, n) with occupations.
    fn expansion(&self, i: usize, init: &InitialCavityState) -> (Vec<C64>, Vec<f64>) {
        let mut n = vec![init.excess()];
        n.extend(&self.occupation);
        (self.rows[i].clone(), n)
    }

    /// ⟨a†(t_a)a†(t_b)a(t_b)a(t_a)⟩/(n(t_a)n(t_b)) by direct expansion over modes
    /// (leakage taken at zero temperature).
    pub fn g2(&self, init: &InitialCavityState, a: usize, b: usize) -> Option<f64> {
        let (ca, n) = self.expansion(a, init);
        let (cb, _) = self.expansion(b, init);
        let ma = self.u[a] * init.mean() + self.y[a];
        let mb = self.u[b] * init.mean() + self.y[b];
        let pair = |x: &[C64], y: &[C64]| -> C64 { (0..n.len()).map(|j| n[j] * x[j].conj() * y[j]).sum() };
        let na = ma.norm_sqr() + pair(&ca, &ca).re;
        let nb = mb.norm_sqr() + pair(&cb, &cb).re;
        if na * nb <= 0.0 {
            return None;
        }
        // four-fluctuation term: Σ_jk n_j n_k (|c_j|²|c'_k|² + c_j* c'_j c'_k* c_k)
        let mut four = 0.0;
        for j in 0..n.len() {
            for k in 0..n.len() {
                let t1 = ca[j].norm_sqr() * cb[k].norm_sqr();
                let t2 = (ca[j].conj() * cb[j] * cb[k].conj() * ca[k]).re;
                four += n[j] * n[k] * (t1 + t2);
            }
        }
        // two-fluctuation terms from (m_a* + α†)(m_b* + β†)(m_b + β)(m_a + α)
        let two = mb.norm_sqr() * pair(&ca, &ca).re
            + ma.norm_sqr() * pair(&cb, &cb).re
            + 2.0 * (ma * mb.conj() * pair(&ca, &cb)).re;
        Some((ma.norm_sqr() * mb.norm_sqr() + two + four) / (na * nb))
    }
}
