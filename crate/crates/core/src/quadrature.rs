//! Gauss–Legendre rules and an adaptive vector-valued integrator.

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_and_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrate a scalar function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Accum {
    total: Vec<f64>,
    err: Vec<f64>,
    worst: f64,
}

/// Adaptive bisection integrator for vector-valued integrands.
#[derive(Debug, Clone)]
pub struct AdaptiveIntegrator {
    rule: GaussLegendre,
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveIntegrator {
    fn default() -> Self {
        Self::new(1e-14)
    }
}

impl AdaptiveIntegrator {
    pub fn new(tol: f64) -> Self {
        Self { rule: GaussLegendre::new(24), tol, max_depth: 48 }
    }

    /// Integrate `f` over `[a, b]`. `f(x, out)` must fill `out` (length `dim`).
    pub fn integrate<F>(&self, a: f64, b: f64, dim: usize, f: &mut F) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &mut [f64]),
    {
        Ok(self.integrate_with_error(a, b, dim, f)?.0)
    }

    /// Like [`integrate`](Self::integrate), also returning a per-component
    /// error estimate (sum of accepted panel differences).
    pub fn integrate_with_error<F>(&self, a: f64, b: f64, dim: usize, f: &mut F) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut scratch = vec![0.0; dim];
        let mut acc = Accum { total: vec![0.0; dim], err: vec![0.0; dim], worst: 0.0 };
        let whole = self.panel(a, b, f, &mut scratch);
        let scale = whole.1.iter().cloned().fold(0.0, f64::max);
        self.recurse(a, b, b - a, whole, scale, 0, f, &mut scratch, &mut acc);
        if acc.worst > 0.0 {
            return Err(Error::Quadrature { achieved: acc.worst, requested: self.tol });
        }
        Ok((acc.total, acc.err))
    }

    fn panel<F>(&self, a: f64, b: f64, f: &mut F, scratch: &mut [f64]) -> (Vec<f64>, Vec<f64>)
    where
        F: FnMut(f64, &mut [f64]),
    {
        let dim = scratch.len();
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = vec![0.0; dim];
        let mut sa = vec![0.0; dim];
        for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            f(c + h * x, scratch);
            for j in 0..dim {
                s[j] += w * scratch[j];
                sa[j] += w * scratch[j].abs();
            }
        }
        for j in 0..dim {
            s[j] *= h;
            sa[j] *= h;
        }
        (s, sa)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        &self,
        a: f64,
        b: f64,
        full: f64,
        whole: (Vec<f64>, Vec<f64>),
        scale: f64,
        depth: usize,
        f: &mut F,
        scratch: &mut [f64],
        acc: &mut Accum,
    ) where
        F: FnMut(f64, &mut [f64]),
    {
        let m = 0.5 * (a + b);
        let left = self.panel(a, m, f, scratch);
        let right = self.panel(m, b, f, scratch);
        let mut diff = 0.0f64;
        let mut abs_here = 0.0f64;
        for j in 0..acc.total.len() {
            diff = diff.max((left.0[j] + right.0[j] - whole.0[j]).abs());
            abs_here = abs_here.max(left.1[j] + right.1[j]);
        }
        let h = b - a;
        let floor = 64.0 * f64::EPSILON * scale.max(abs_here);
        let ok = diff <= self.tol * h / full || diff <= floor;
        if ok || depth >= self.max_depth {
            if !ok {
                acc.worst = acc.worst.max(diff);
            }
            for j in 0..acc.total.len() {
                let v = left.0[j] + right.0[j];
                acc.total[j] += v;
                acc.err[j] += (v - whole.0[j]).abs();
            }
            return;
        }
        self.recurse(a, m, full, left, scale, depth + 1, f, scratch, acc);
        self.recurse(m, b, full, right, scale, depth + 1, f, scratch, acc);
    }

    /// Integrate a scalar function.
    pub fn integrate_scalar<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let mut g = |x: f64, out: &mut [f64]| out[0] = f(x);
        Ok(self.integrate(a, b, 1, &mut g)?[0])
    }
}
