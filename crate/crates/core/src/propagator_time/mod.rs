// SPDX-License-Identifier: Apache-2.0

//! Time-domain propagators: ũ from the Volterra form of the u equation, the driven
//! field ỹ by convolution, and the noise correlation ṽ.

mod interp;
mod noise;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::quad::{gl10, gregory_weights, lagrange};
use crate::spectral::{EnvironmentSpec, Kernel, SpectralModel};
use crate::{Error, Result};

pub use interp::{CumulativeFourier, Hermite};
pub use noise::{solve_v, solve_v_time_domain, ThermalNoise, VMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub v_stride: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        if steps < 2 {
            return Err(Error::Parameter(format!("grid needs at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { dt, steps, v_stride: 4 })
    }

    /// Grid with step `dt` covering [0, horizon].
    pub fn covering(dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        Self::new(dt, (horizon / dt - 1e-9).ceil() as usize)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Parameter("v stride must be at least 1".into()));
        }
        self.v_stride = stride;
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.dt * i as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }

    /// Grid index of time t, if t lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.dt;
        let i = x.round();
        ((x - i).abs() < 1e-6 && i >= 0.0 && i <= self.steps as f64).then_some(i as usize)
    }
}

/// Solved series on a grid (rotating frame).
#[derive(Debug, Clone)]
pub struct Propagators {
    pub grid: TimeGrid,
    pub u: Vec<C64>,
    /// Right-hand side of the u equation, not a finite difference.
    pub udot: Vec<C64>,
    pub y: Vec<C64>,
    /// Exact time derivative of ỹ (right limit at drive switching instants).
    pub ydot: Vec<C64>,
    /// v(t,t), full resolution.
    pub v_diag: Vec<f64>,
    /// d/dt v(t,t).
    pub v_diag_rate: Vec<f64>,
    /// v on the strided mesh, when requested.
    pub v_mesh: Option<VMesh>,
    pub noise: ThermalNoise,
}

impl Propagators {
    /// Solve u, y and the v diagonal. The strided v mesh is left for `with_mesh`.
    pub fn solve(model: &SpectralModel, env: &EnvironmentSpec, drive: &DriveSpec, grid: &TimeGrid) -> Result<Self> {
        let (u, udot) = solve_u(model, env, grid)?;
        let (y, ydot) = solve_y_with_rate(&u, &udot, drive, env.cavity_frequency, grid)?;
        let noise = ThermalNoise::new(&u, &udot, model, env, grid);
        let (v_diag, v_diag_rate) = noise.diagonal();
        Ok(Propagators { grid: *grid, u, udot, y, ydot, v_diag, v_diag_rate, v_mesh: None, noise })
    }

    pub fn with_mesh(mut self) -> Self {
        self.v_mesh = Some(self.noise.mesh(self.grid.v_stride));
        self
    }

    /// Replace the drive, keeping u and v.
    pub fn redriven(&self, drive: &DriveSpec, cavity: f64) -> Result<Self> {
        let (y, ydot) = solve_y_with_rate(&self.u, &self.udot, drive, cavity, &self.grid)?;
        Ok(Propagators { y, ydot, ..self.clone() })
    }
}

/// Solve ũ(t) = 1 − ∫₀ᵗ K(t−s)ũ(s)ds with K = κ + G, G(t) = ∫₀ᵗ g, which is the
/// integrated form of u̇ = −κu − ∫₀ᵗ g(t−s)u(s)ds. Fourth-order: cubic product
/// integration for the first three steps, Gregory weights afterwards. u̇ is then taken
/// from the right-hand side of the differential form.
pub fn solve_u(model: &SpectralModel, env: &EnvironmentSpec, grid: &TimeGrid) -> Result<(Vec<C64>, Vec<C64>)> {
    let kernel = Kernel::new(model, env, grid.horizon())?;
    Ok(solve_u_with_kernel(&kernel, env.kappa, grid))
}

pub(crate) fn solve_u_with_kernel(kernel: &Kernel, kappa: f64, grid: &TimeGrid) -> (Vec<C64>, Vec<C64>) {
    let (n_max, dt) = (grid.steps, grid.dt);
    let (g, big) = kernel.series(dt, n_max);
    let k: Vec<C64> = big.iter().map(|&x| x + kappa).collect();
    let k_at = |t: f64| kernel.cumulative(t) + kappa;
    let g_at = |t: f64| kernel.g(t);
    let zero = C64::new(0.0, 0.0);

    let mut u = vec![zero; n_max + 1];
    u[0] = C64::new(1.0, 0.0);
    let start = n_max.min(3);
    let mut a = Matrix3::<C64>::identity();
    let mut b = Vector3::from_element(C64::new(1.0, 0.0));
    for n in 1..=3 {
        let w = start_weights(&k_at, n, dt, 4);
        b[n - 1] -= w[0];
        for j in 1..4 {
            a[(n - 1, j - 1)] += w[j];
        }
    }
    let sol = a.lu().solve(&b).expect("starting block is a small perturbation of the identity");
    for n in 1..=start {
        u[n] = sol[n - 1];
    }
    for n in 4..=n_max {
        let w = gregory_weights(n);
        let s: C64 = (0..n).map(|j| w[j] * k[n - j] * u[j]).sum();
        u[n] = (1.0 - dt * s) / (1.0 + dt * w[n] * k[0]);
    }

    let mut udot = vec![zero; n_max + 1];
    udot[0] = -kappa * u[0];
    for n in 1..=n_max {
        let conv: C64 = if n <= 3 && n_max >= 4 {
            let w = start_weights(&g_at, n, dt, 5);
            (0..5).map(|j| w[j] * u[j]).sum()
        } else if n == 1 {
            0.5 * dt * (g[1] * u[0] + g[0] * u[1])
        } else {
            let w = gregory_weights(n);
            dt * (0..=n).map(|j| w[j] * g[n - j] * u[j]).sum::<C64>()
        };
        udot[n] = -kappa * u[n] - conv;
    }
    (u, udot)
}

/// ∫₀^{t_n} f(t_n − s) L_j(s/dt) ds for the Lagrange basis on nodes 0..m−1.
fn start_weights(f: &impl Fn(f64) -> C64, n: usize, dt: f64, m: usize) -> Vec<C64> {
    let rule = gl10();
    let span = n as f64 * dt;
    let mut w = vec![C64::new(0.0, 0.0); m];
    for (&x, &q) in rule.x.iter().zip(&rule.w) {
        let s = 0.5 * (x + 1.0) * span;
        let fv = f(span - s) * (0.5 * q * span);
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += fv * lagrange(m, j, s / dt);
        }
    }
    w
}

/// ỹ(t) = −i∫₀ᵗ ũ(t−τ) f̃(τ)dτ.
pub fn solve_y(u: &[C64], udot: &[C64], drive: &DriveSpec, cavity: f64, grid: &TimeGrid) -> Result<Vec<C64>> {
    Ok(solve_y_with_rate(u, udot, drive, cavity, grid)?.0)
}

/// ỹ and its exact derivative. Each drive piece A e^{−iντ} on [a, b) contributes
/// −iA e^{−iνt}[F_ν(t−a) − F_ν(t−min(b,t))] with F_ν(x) = ∫₀ˣ ũ(s)e^{iνs}ds.
pub fn solve_y_with_rate(
    u: &[C64],
    udot: &[C64],
    drive: &DriveSpec,
    cavity: f64,
    grid: &TimeGrid,
) -> Result<(Vec<C64>, Vec<C64>)> {
    drive.validate()?;
    let zero = C64::new(0.0, 0.0);
    let mut y = vec![zero; grid.steps + 1];
    let mut ydot = vec![zero; grid.steps + 1];
    let herm = Hermite::new(u, udot, grid.dt);
    let mi = C64::new(0.0, -1.0);
    for p in drive.pieces(cavity) {
        if p.nu.abs() * grid.dt > std::f64::consts::PI {
            return Err(Error::Sampling(format!(
                "drive detuning {:.4e} rad/µs exceeds the grid Nyquist limit {:.4e}",
                p.nu.abs(),
                std::f64::consts::PI / grid.dt
            )));
        }
        let f = CumulativeFourier::new(&herm, p.nu);
        for n in 0..=grid.steps {
            let t = grid.time(n);
            if t < p.start {
                continue;
            }
            let upper = f.at(t - p.start);
            let lower = if t >= p.end { f.at(t - p.end) } else { zero };
            let e = C64::from_polar(1.0, -p.nu * t);
            let yp = mi * p.amplitude * e * (upper - lower);
            y[n] += yp;
            let mut rate = herm.at(t - p.start) * C64::from_polar(1.0, -p.nu * p.start);
            if t >= p.end {
                rate -= herm.at(t - p.end) * C64::from_polar(1.0, -p.nu * p.end);
            }
            ydot[n] += -C64::new(0.0, p.nu) * yp + mi * p.amplitude * rate;
        }
    }
    Ok((y, ydot))
}
