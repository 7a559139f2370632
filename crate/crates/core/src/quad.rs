// SPDX-License-Identifier: Apache-2.0

//! Composite Gauss–Legendre rules and panel layouts shared by the spectral integrals.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("rule order must be positive"));
        let (x, w) = gl.as_node_weight_pairs().iter().copied().unzip();
        Rule { x, w }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.x
            .iter()
            .zip(&self.w)
            .fold(T::default(), |acc, (&x, &w)| acc + f(m + h * x) * (w * h))
    }
}

macro_rules! cached_rule {
    ($name:ident, $n:expr) => {
        pub fn $name() -> &'static Rule {
            static R: OnceLock<Rule> = OnceLock::new();
            R.get_or_init(|| Rule::new($n))
        }
    };
}

cached_rule!(gl4, 4);
cached_rule!(gl10, 10);
cached_rule!(gl16, 16);

/// Panels of width at most `max_width` covering [a, b].
pub fn uniform_panels(a: f64, b: f64, max_width: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| (a + h * i as f64, if i + 1 == n { b } else { a + h * (i + 1) as f64 }))
        .collect()
}

/// Panels covering [-outer, outer]: uniform of width `width` on [-core, core], then
/// geometrically widening by `growth` out to the edges.
pub fn graded_panels(core: f64, outer: f64, width: f64, growth: f64) -> Vec<(f64, f64)> {
    let core = core.min(outer);
    let mut right = Vec::new();
    let mut a = core;
    let mut h = width;
    while a < outer {
        h *= growth;
        let mut b = a + h;
        // do not leave a sliver at the end
        if b > outer || outer - b < 0.5 * h * growth {
            b = outer;
        }
        right.push((a, b));
        a = b;
    }
    let mut out: Vec<(f64, f64)> = right.iter().rev().map(|&(a, b)| (-b, -a)).collect();
    out.extend(uniform_panels(-core, core, width));
    out.extend(right);
    out
}

/// Nodes and plain quadrature weights of a composite rule.
#[derive(Debug, Clone, Default)]
pub struct Measure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Measure {
    pub fn from_panels(panels: &[(f64, f64)], rule: &Rule) -> Self {
        let mut m = Measure {
            nodes: Vec::with_capacity(panels.len() * rule.x.len()),
            weights: Vec::with_capacity(panels.len() * rule.x.len()),
        };
        for &(a, b) in panels {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (&x, &w) in rule.x.iter().zip(&rule.w) {
                m.nodes.push(c + h * x);
                m.weights.push(w * h);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Weights of the fourth-order composite rule on n+1 equispaced points (unit spacing):
/// Simpson for n = 2, 4; 3/8 for n = 3; 3/8 then Simpson for n = 5; Gregory end
/// corrections for n ≥ 6.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    match n {
        0 => vec![0.0],
        1 => vec![0.5, 0.5],
        2 => vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        3 => vec![3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0],
        4 => vec![1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        5 => vec![3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0 + 1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        _ => {
            let mut w = vec![1.0; n + 1];
            let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
            for (i, &e) in ends.iter().enumerate() {
                w[i] = e;
                w[n - i] = e;
            }
            w
        }
    }
}

/// Lagrange basis polynomial `j` on integer nodes 0..m evaluated at `s`.
pub fn lagrange(m: usize, j: usize, s: f64) -> f64 {
    (0..m)
        .filter(|&k| k != j)
        .map(|k| (s - k as f64) / (j as f64 - k as f64))
        .product()
}
