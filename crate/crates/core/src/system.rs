//! Finite orthonormal systems evaluated row by row.

use crate::basis1d::{BasisFamily, MeasureId};

/// A finite orthonormal system `η_0, …, η_{m-1}` on `[0,1]^d`.
pub trait OrthonormalSystem: Send + Sync {
    /// Dimension `d` of the input points.
    fn input_dim(&self) -> usize;

    /// Number of basis functions `m`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write `η_k(x)` for all `k < len()` into `out`.
    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    /// Measure in which the system is orthonormal (per coordinate).
    fn measure(&self) -> MeasureId;

    fn label(&self) -> String;

    /// Fitted expansion `Σ c_k η_k(x)`.
    fn expand(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        let mut v = vec![0.0; self.len()];
        self.eval_into(x, &mut v);
        v.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

/// The first `m` functions of a 1D family.
#[derive(Debug, Clone)]
pub struct Truncated1d {
    family: BasisFamily,
    m: usize,
}

impl Truncated1d {
    pub fn new(family: BasisFamily, m: usize) -> Self {
        Self { family, m }
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }
}

impl OrthonormalSystem for Truncated1d {
    fn input_dim(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        self.m
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.family.eval_all(x[0], &mut out[..self.m]);
    }

    fn measure(&self) -> MeasureId {
        self.family.measure()
    }

    fn label(&self) -> String {
        self.family.id().to_string()
    }
}
