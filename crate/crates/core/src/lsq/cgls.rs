use crate::error::{Error, Result};
use crate::numeric::norm2_sq;

use super::operator::DesignOperator;

/// Stopping rule for [`cgls`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CglsOptions {
    pub max_iter: usize,
    /// Stop once `‖Aᵀr‖ <= rel_tol · ‖Aᵀb‖`.
    pub rel_tol: f64,
}

impl Default for CglsOptions {
    fn default() -> Self {
        Self { max_iter: 20, rel_tol: 1e-12 }
    }
}

/// Result of one CGLS run.
#[derive(Debug, Clone, PartialEq)]
pub struct CglsOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final normal-equation residual `‖Aᵀ(b - Ax)‖`.
    pub residual: f64,
    pub converged: bool,
}

/// CGLS on `min ‖Ax - b‖` for several right-hand sides in lockstep.
///
/// Each right-hand side runs its own recurrence; one fused operator
/// application per iteration serves all sides still active.
pub fn cgls_multi(op: &DesignOperator, rhs: &[Vec<f64>], opts: CglsOptions) -> Result<Vec<CglsOutput>> {
    let n = op.n();
    let m = op.m();
    let r = rhs.len();
    if r == 0 {
        return Ok(Vec::new());
    }
    for b in rhs {
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }

    let mut x = vec![vec![0.0; m]; r];
    let mut res: Vec<Vec<f64>> = rhs.to_vec();
    let s0 = adjoint_cols(op, &res);
    let mut p = s0.clone();
    let mut gamma: Vec<f64> = s0.iter().map(|s| norm2_sq(s)).collect();
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::Breakdown { iteration: 0 });
    }
    let gamma0 = gamma.clone();
    let mut active: Vec<bool> = gamma.iter().map(|&g| g > 0.0).collect();
    let mut iters = vec![0usize; r];

    for it in 1..=opts.max_iter {
        let idx: Vec<usize> = (0..r).filter(|&j| active[j]).collect();
        if idx.is_empty() {
            break;
        }
        let ps: Vec<&Vec<f64>> = idx.iter().map(|&j| &p[j]).collect();
        let q = apply_cols(op, &ps);
        for (qi, &j) in q.iter().zip(&idx) {
            let qq = norm2_sq(qi);
            if !(qq > 0.0) || !qq.is_finite() {
                return Err(Error::Breakdown { iteration: it });
            }
            let alpha = gamma[j] / qq;
            for (xk, pk) in x[j].iter_mut().zip(&p[j]) {
                *xk += alpha * pk;
            }
            for (rk, qk) in res[j].iter_mut().zip(qi) {
                *rk -= alpha * qk;
            }
        }
        let rs: Vec<Vec<f64>> = idx.iter().map(|&j| res[j].clone()).collect();
        let s = adjoint_cols(op, &rs);
        for (si, &j) in s.into_iter().zip(&idx) {
            let g = norm2_sq(&si);
            if !g.is_finite() {
                return Err(Error::NonFinite(j));
            }
            let beta = g / gamma[j];
            for (pk, sk) in p[j].iter_mut().zip(&si) {
                *pk = sk + beta * *pk;
            }
            gamma[j] = g;
            iters[j] = it;
            if g.sqrt() <= opts.rel_tol * gamma0[j].sqrt() {
                active[j] = false;
            }
        }
    }

    Ok((0..r)
        .map(|j| CglsOutput {
            x: std::mem::take(&mut x[j]),
            iterations: iters[j],
            residual: gamma[j].sqrt(),
            converged: !active[j],
        })
        .collect())
}

/// Single right-hand-side CGLS.
pub fn cgls(op: &DesignOperator, b: &[f64], opts: CglsOptions) -> Result<CglsOutput> {
    Ok(cgls_multi(op, &[b.to_vec()], opts)?.pop().expect("one right-hand side"))
}

fn apply_cols(op: &DesignOperator, cols: &[&Vec<f64>]) -> Vec<Vec<f64>> {
    let r = cols.len();
    let m = op.m();
    let mut u = vec![0.0; m * r];
    for (j, c) in cols.iter().enumerate() {
        for k in 0..m {
            u[k * r + j] = c[k];
        }
    }
    split_rows(&op.apply_multi(&u, r), r)
}

fn adjoint_cols(op: &DesignOperator, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = cols.len();
    let n = op.n();
    let mut v = vec![0.0; n * r];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            v[i * r + j] = c[i];
        }
    }
    split_rows(&op.adjoint_multi(&v, r), r)
}

fn split_rows(flat: &[f64], r: usize) -> Vec<Vec<f64>> {
    let len = flat.len() / r;
    (0..r).map(|j| (0..len).map(|i| flat[i * r + j]).collect()).collect()
}
