use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{dot, norm2_sq};

use super::operator::DesignOperator;

/// Largest `n·m` for which [`SpectrumMethod::Auto`] picks Golub–Kahan.
pub const AUTO_GK_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Full Golub–Kahan bidiagonalization with reorthogonalization.
    GolubKahan,
    /// Power iteration for `s_max`, shifted power iteration for `s_min`.
    PowerShift,
    /// Golub–Kahan when `n·m <= AUTO_GK_LIMIT`, otherwise power/shift.
    Auto,
}

/// Extreme singular values of `(1/√n) W^{1/2} L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeSingularValues {
    pub s_min: f64,
    pub s_max: f64,
    pub converged: bool,
    pub method: SpectrumMethod,
}

impl ExtremeSingularValues {
    pub fn condition_number(&self) -> f64 {
        self.s_max / self.s_min
    }
}

pub fn extreme_singular_values(op: &DesignOperator, method: SpectrumMethod) -> Result<ExtremeSingularValues> {
    if op.n() < op.m() {
        return Err(invalid(format!("need n >= m, got n = {} and m = {}", op.n(), op.m())));
    }
    match method {
        SpectrumMethod::GolubKahan => golub_kahan(op),
        SpectrumMethod::PowerShift => Ok(power_shift(op, 1e-6)),
        SpectrumMethod::Auto => {
            if op.n().saturating_mul(op.m()) <= AUTO_GK_LIMIT {
                golub_kahan(op)
            } else {
                Ok(power_shift(op, 1e-6))
            }
        }
    }
}

fn random_unit(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nrm = norm2_sq(&v).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

/// Remove the components along `basis` (two passes of classical Gram–Schmidt).
fn reorthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

/// Replace a collapsed direction with a fresh one orthogonal to `basis`.
fn fresh_direction(len: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v = random_unit(len, rng);
        reorthogonalize(&mut v, basis);
        let nrm = norm2_sq(&v).sqrt();
        if nrm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nrm);
            return v;
        }
    }
}

/// `m` steps of Golub–Kahan bidiagonalization of `A = W^{1/2} L`; the
/// bidiagonal factor has the same singular values as `A`.
fn golub_kahan(op: &DesignOperator) -> Result<ExtremeSingularValues> {
    let n = op.n();
    let m = op.m();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut us: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);

    let mut v = random_unit(m, &mut rng);
    for j in 0..m {
        let mut p = op.apply(&v);
        if j > 0 {
            let b = beta[j - 1];
            for (x, u) in p.iter_mut().zip(&us[j - 1]) {
                *x -= b * u;
            }
        }
        reorthogonalize(&mut p, &us);
        let a = norm2_sq(&p).sqrt();
        let u = if a > 1e-300 { p.iter().map(|x| x / a).collect() } else { fresh_direction(n, &us, &mut rng) };
        alpha.push(a);
        vs.push(v);
        us.push(u);
        if j + 1 == m {
            break;
        }
        let mut r = op.apply_adjoint(&us[j]);
        for (x, vv) in r.iter_mut().zip(&vs[j]) {
            *x -= a * vv;
        }
        reorthogonalize(&mut r, &vs);
        let b = norm2_sq(&r).sqrt();
        v = if b > 1e-300 { r.iter().map(|x| x / b).collect() } else { fresh_direction(m, &vs, &mut rng) };
        beta.push(b);
    }

    let mut bmat = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        bmat[(j, j)] = alpha[j];
        if j + 1 < m {
            bmat[(j, j + 1)] = beta[j];
        }
    }
    let sv = bmat.singular_values();
    let scale = (n as f64).sqrt();
    let s_max = sv.iter().cloned().fold(0.0, f64::max) / scale;
    let s_min = sv.iter().cloned().fold(f64::INFINITY, f64::min) / scale;
    Ok(ExtremeSingularValues { s_min, s_max, converged: true, method: SpectrumMethod::GolubKahan })
}

/// `G v = (1/n) Aᵀ A v`.
fn gram_apply(op: &DesignOperator, v: &[f64]) -> Vec<f64> {
    let inv_n = 1.0 / op.n() as f64;
    op.apply_adjoint(&op.apply(v)).into_iter().map(|x| x * inv_n).collect()
}

/// Power iteration on `f`; returns the Rayleigh quotient and a convergence flag.
fn power<F: Fn(&[f64]) -> Vec<f64>>(f: F, m: usize, tol: f64, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let cap = 10 * m.max(10);
    let mut best = 0.0;
    for _attempt in 0..2 {
        let mut v = random_unit(m, rng);
        let mut lambda = 0.0f64;
        for _ in 0..cap {
            let w = f(&v);
            let next = dot(&v, &w);
            let nrm = norm2_sq(&w).sqrt();
            if nrm == 0.0 {
                return (0.0, true);
            }
            v = w.into_iter().map(|x| x / nrm).collect();
            if (next - lambda).abs() <= tol * next.abs() {
                return (next, true);
            }
            lambda = next;
        }
        best = lambda;
    }
    (best, false)
}

fn power_shift(op: &DesignOperator, tol: f64) -> ExtremeSingularValues {
    let m = op.m();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (lmax, ok1) = power(|v| gram_apply(op, v), m, tol, &mut rng);
    let (mu, ok2) = power(
        |v| {
            let g = gram_apply(op, v);
            v.iter().zip(&g).map(|(a, b)| lmax * a - b).collect()
        },
        m,
        tol,
        &mut rng,
    );
    let lmin = (lmax - mu).max(0.0);
    ExtremeSingularValues {
        s_min: lmin.sqrt(),
        s_max: lmax.sqrt(),
        converged: ok1 && ok2,
        method: SpectrumMethod::PowerShift,
    }
}
