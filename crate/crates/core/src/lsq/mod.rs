//! Weighted least squares `ĝ = argmin ‖Lâ - y‖²_W` and the associated
//! spectral diagnostics.

mod cgls;
mod operator;
mod spectrum;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::system::OrthonormalSystem;

pub use cgls::{cgls, cgls_multi, CglsOptions, CglsOutput};
pub use operator::{DesignOperator, OperatorMode, AUTO_MATERIALIZE_LIMIT};
pub use spectrum::{extreme_singular_values, ExtremeSingularValues, SpectrumMethod, AUTO_GK_LIMIT};

/// Default iteration budget.
pub const DEFAULT_ITERATIONS: usize = 20;

/// Coefficients `ĝ` of `S_m y` with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastSquaresFit {
    pub basis: String,
    pub m: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    #[serde(skip)]
    pub converged: bool,
}

impl LeastSquaresFit {
    fn from_output(op: &DesignOperator, out: CglsOutput) -> Self {
        Self {
            basis: op.system().label(),
            m: op.m(),
            n: op.n(),
            seed: None,
            coefficients: out.x,
            iterations: out.iterations,
            residual: out.residual,
            s_min: None,
            s_max: None,
            converged: out.converged,
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_spectrum(mut self, sv: &ExtremeSingularValues) -> Self {
        self.s_min = Some(sv.s_min);
        self.s_max = Some(sv.s_max);
        self
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// `(S_m y)(x)`.
    pub fn evaluate(&self, system: &dyn OrthonormalSystem, x: &[f64]) -> Result<f64> {
        apply_sm(&self.coefficients, system, x)
    }
}

fn options(iters: usize) -> Result<CglsOptions> {
    if iters == 0 {
        return Err(invalid("iteration count must be >= 1"));
    }
    Ok(CglsOptions { max_iter: iters, ..CglsOptions::default() })
}

/// Solve the weighted problem for one data vector.
pub fn solve_weighted_lsq(op: &DesignOperator, y: &[f64], iters: usize) -> Result<LeastSquaresFit> {
    let opts = options(iters)?;
    if y.len() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), got: y.len() });
    }
    let out = cgls(op, &op.weighted_rhs(y), opts)?;
    Ok(LeastSquaresFit::from_output(op, out))
}

/// Solve for several data vectors sharing the same points and weights.
pub fn solve_weighted_lsq_multi(op: &DesignOperator, ys: &[&[f64]], iters: usize) -> Result<Vec<LeastSquaresFit>> {
    let opts = options(iters)?;
    let mut rhs = Vec::with_capacity(ys.len());
    for y in ys {
        if y.len() != op.n() {
            return Err(Error::DimensionMismatch { expected: op.n(), got: y.len() });
        }
        rhs.push(op.weighted_rhs(y));
    }
    Ok(cgls_multi(op, &rhs, opts)?.into_iter().map(|o| LeastSquaresFit::from_output(op, o)).collect())
}

/// `Σ_k ĝ_k η_k(x)`.
pub fn apply_sm(coefficients: &[f64], system: &dyn OrthonormalSystem, x: &[f64]) -> Result<f64> {
    if coefficients.len() != system.len() {
        return Err(Error::DimensionMismatch { expected: system.len(), got: coefficients.len() });
    }
    if x.len() != system.input_dim() {
        return Err(Error::DimensionMismatch { expected: system.input_dim(), got: x.len() });
    }
    Ok(system.expand(coefficients, x))
}
