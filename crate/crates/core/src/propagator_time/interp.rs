// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as C64;

use crate::quad::gl10;

/// Piecewise cubic Hermite interpolant of ũ built from the stored values and exact
/// derivatives; fourth-order accurate between grid points.
#[derive(Debug, Clone)]
pub struct Hermite<'a> {
    pub u: &'a [C64],
    pub udot: &'a [C64],
    pub dt: f64,
}

/// Cubic Hermite basis (h00, h10, h01, h11) at σ ∈ [0, 1].
fn basis(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2]
}

impl<'a> Hermite<'a> {
    pub fn new(u: &'a [C64], udot: &'a [C64], dt: f64) -> Self {
        Hermite { u, udot, dt }
    }

    pub fn cells(&self) -> usize {
        self.u.len() - 1
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = ((x / self.dt).floor().max(0.0) as usize).min(self.cells() - 1);
        (n, x / self.dt - n as f64)
    }

    /// Cell data (u_n, h u'_n, u_{n+1}, h u'_{n+1}).
    pub fn cell(&self, n: usize) -> [C64; 4] {
        let h = self.dt;
        [self.u[n], self.udot[n] * h, self.u[n + 1], self.udot[n + 1] * h]
    }

    pub fn at(&self, x: f64) -> C64 {
        let (n, s) = self.locate(x);
        let b = basis(s);
        let c = self.cell(n);
        (0..4).map(|k| c[k] * b[k]).sum()
    }
}

/// M_k(θ) = ∫₀¹ h_k(σ) e^{iθσ} dσ for the Hermite basis.
pub fn cell_moments(theta: f64) -> [C64; 4] {
    let rule = gl10();
    let mut m = [C64::new(0.0, 0.0); 4];
    for (&x, &w) in rule.x.iter().zip(&rule.w) {
        let s = 0.5 * (x + 1.0);
        let e = C64::from_polar(0.5 * w, theta * s);
        for (mk, bk) in m.iter_mut().zip(basis(s)) {
            *mk += e * bk;
        }
    }
    m
}

/// F_ν(x) = ∫₀ˣ ũ(s) e^{iνs} ds, tabulated on the grid, with partial cells on demand.
#[derive(Debug, Clone)]
pub struct CumulativeFourier<'a> {
    herm: &'a Hermite<'a>,
    nu: f64,
    table: Vec<C64>,
}

impl<'a> CumulativeFourier<'a> {
    pub fn new(herm: &'a Hermite<'a>, nu: f64) -> Self {
        let h = herm.dt;
        let m = cell_moments(nu * h);
        let mut table = Vec::with_capacity(herm.u.len());
        table.push(C64::new(0.0, 0.0));
        let step = C64::from_polar(1.0, nu * h);
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..herm.cells() {
            if n % 64 == 0 {
                phase = C64::from_polar(1.0, nu * h * n as f64);
            }
            let c = herm.cell(n);
            let cell: C64 = (0..4).map(|k| c[k] * m[k]).sum();
            acc += phase * cell * h;
            table.push(acc);
            phase *= step;
        }
        CumulativeFourier { herm, nu, table }
    }

    pub fn grid(&self) -> &[C64] {
        &self.table
    }

    pub fn at(&self, x: f64) -> C64 {
        let h = self.herm.dt;
        let (n, s) = self.herm.locate(x);
        if s == 0.0 {
            return self.table[n];
        }
        let c = self.herm.cell(n);
        let t0 = n as f64 * h;
        let rule = gl10();
        let mut part = C64::new(0.0, 0.0);
        for (&xq, &w) in rule.x.iter().zip(&rule.w) {
            let sig = 0.5 * (xq + 1.0) * s;
            let b = basis(sig);
            let v: C64 = (0..4).map(|k| c[k] * b[k]).sum();
            part += v * C64::from_polar(0.5 * w * s * h, self.nu * (t0 + sig * h));
        }
        self.table[n] + part
    }
}
