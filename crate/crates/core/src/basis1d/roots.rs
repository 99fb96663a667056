//! Roots of `cosh(t) cos(t) = 1`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numeric::{two_prod, PI_LO};

/// Default residual tolerance for stored roots.
pub const ROOT_TOL: f64 = 1e-12;

/// Residual in overflow-free form: `cos(t) - 1/cosh(t)`.
#[inline]
pub fn root_residual(t: f64) -> f64 {
    t.cos() - 1.0 / t.cosh()
}

#[inline]
fn residual_derivative(t: f64) -> f64 {
    // d/dt [cos t - sech t] = -sin t + tanh t sech t
    -t.sin() + t.tanh() / t.cosh()
}

/// Asymptotic root `(2k - 1) pi / 2`.
#[inline]
pub fn t_tilde(k: usize) -> f64 {
    let c = (2 * k - 1) as f64 * 0.5;
    let (hi, lo) = two_prod(c, PI);
    hi + (lo + c * PI_LO)
}

/// Bracket guaranteed to contain `t_k`.
pub fn root_bracket(k: usize) -> (f64, f64) {
    let mid = t_tilde(k);
    if k % 2 == 0 {
        (mid, k as f64 * PI)
    } else {
        ((k - 1) as f64 * PI, mid)
    }
}

/// Solve for the `k`-th positive root (`k >= 2`) of `cosh(t) cos(t) = 1`.
///
/// Bisection to width `1e-14` (or until no double lies strictly inside),
/// then two Newton steps kept inside the bracket.
pub fn solve_tk(k: usize, tol: f64) -> Result<f64> {
    if k < 2 {
        return Err(invalid(format!("root index must be >= 2, got {k}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = root_bracket(k);
    let mut flo = root_residual(lo);
    let mut fhi = root_residual(hi);

    // For large k the root sits within an ulp of (2k-1)pi/2, and rounding of
    // that endpoint can hide the sign change. Step the endpoint outward.
    let near_tilde_is_lo = k % 2 == 0;
    let mut widen = 0;
    while flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        if widen > 64 {
            return Err(Error::RootNotConverged { k, lo, hi });
        }
        widen += 1;
        if near_tilde_is_lo {
            lo = lo.next_down();
            flo = root_residual(lo);
        } else {
            hi = hi.next_up();
            fhi = root_residual(hi);
        }
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }

    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = root_residual(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = residual_derivative(t);
        if d == 0.0 {
            break;
        }
        let next = t - root_residual(t) / d;
        if next >= lo && next <= hi {
            t = next;
        }
    }
    // Pick the best of the candidates that remain.
    for cand in [lo, hi] {
        if root_residual(cand).abs() < root_residual(t).abs() {
            t = cand;
        }
    }
    if root_residual(t).abs() <= tol {
        Ok(t)
    } else {
        Err(Error::RootNotConverged { k, lo, hi })
    }
}

/// Roots `t_2 .. t_{k_max}` in increasing order.
#[derive(Debug, Clone)]
pub struct EigenRootTable {
    roots: Vec<f64>,
    tolerance: f64,
}

impl EigenRootTable {
    /// Solve all roots with index `2 <= k <= k_max`.
    pub fn new(k_max: usize, tolerance: f64) -> Result<Self> {
        let roots =
            (2..=k_max.max(1)).filter(|&k| k >= 2).map(|k| solve_tk(k, tolerance)).collect::<Result<Vec<_>>>()?;
        Ok(Self { roots, tolerance })
    }

    /// Root `t_k`, if stored.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(2).and_then(|i| self.roots.get(i).copied())
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Largest stored index, or 1 if the table is empty.
    pub fn k_max(&self) -> usize {
        self.roots.len() + 1
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}
