use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::sampling::SampleSet;
use crate::system::OrthonormalSystem;

/// Rows per work unit.
const BLOCK: usize = 256;
/// Upper limit on the number of partial sums in an adjoint product.
const MAX_GROUPS: usize = 64;

/// Largest `n·m` that [`OperatorMode::Auto`] stores explicitly.
pub const AUTO_MATERIALIZE_LIMIT: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorMode {
    /// Store `L` as a dense `n × m` array.
    Materialized,
    /// Recompute rows of `L` on every application.
    MatrixFree,
    /// Materialize when `n·m <= AUTO_MATERIALIZE_LIMIT`.
    Auto,
}

/// `A = W^{1/2} L` with `L_ik = η_k(x_i)` and `W = diag(ω_i)`.
///
/// Products are computed over fixed row blocks; adjoint partial sums are
/// reduced in block order, so results do not depend on the thread count.
#[derive(Clone)]
pub struct DesignOperator {
    system: Arc<dyn OrthonormalSystem>,
    points: Arc<Vec<f64>>,
    dim: usize,
    weights: Arc<Vec<f64>>,
    sqrt_w: Arc<Vec<f64>>,
    matrix: Option<Arc<Vec<f64>>>,
    stride: usize,
    m: usize,
}

impl std::fmt::Debug for DesignOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DesignOperator")
            .field("system", &self.system.label())
            .field("n", &self.n())
            .field("m", &self.m)
            .field("materialized", &self.is_materialized())
            .finish()
    }
}

impl DesignOperator {
    pub fn new(system: Arc<dyn OrthonormalSystem>, samples: &SampleSet, mode: OperatorMode) -> Result<Self> {
        Self::from_points(system, samples.dim(), Arc::new(samples.points().to_vec()), samples.weights().to_vec(), mode)
    }

    pub fn from_points(
        system: Arc<dyn OrthonormalSystem>,
        dim: usize,
        points: Arc<Vec<f64>>,
        weights: Vec<f64>,
        mode: OperatorMode,
    ) -> Result<Self> {
        if system.input_dim() != dim {
            return Err(Error::DimensionMismatch { expected: system.input_dim(), got: dim });
        }
        let n = weights.len();
        if points.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: points.len() });
        }
        let m = system.len();
        if m == 0 {
            return Err(invalid("basis must contain at least one function"));
        }
        if n == 0 {
            return Err(invalid("need at least one sample"));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("weight {i} is not positive and finite")));
        }
        if n < m {
            log::warn!("underdetermined system: n = {n} < m = {m}");
        }
        let sqrt_w = Arc::new(weights.iter().map(|w| w.sqrt()).collect());
        let materialize = match mode {
            OperatorMode::Materialized => true,
            OperatorMode::MatrixFree => false,
            OperatorMode::Auto => n.saturating_mul(m) <= AUTO_MATERIALIZE_LIMIT,
        };
        let mut op = Self { system, points, dim, weights: Arc::new(weights), sqrt_w, matrix: None, stride: m, m };
        if materialize {
            let mut mat = Vec::new();
            mat.try_reserve_exact(n * m)
                .map_err(|_| Error::Resource(format!("cannot allocate a {n} x {m} design matrix")))?;
            mat.resize(n * m, 0.0);
            let sys = &op.system;
            let pts = &op.points;
            mat.par_chunks_mut(m).enumerate().for_each(|(i, row)| sys.eval_into(&pts[i * dim..(i + 1) * dim], row));
            op.matrix = Some(Arc::new(mat));
        }
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_materialized(&self) -> bool {
        self.matrix.is_some()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn system(&self) -> &Arc<dyn OrthonormalSystem> {
        &self.system
    }

    /// View restricted to the first `m` columns; shares any stored matrix.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.m {
            return Err(invalid(format!("column count must lie in 1..={}, got {m}", self.m)));
        }
        Ok(Self { m, ..self.clone() })
    }

    /// Unweighted entry `L_ik = η_k(x_i)`.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        let mut scratch = vec![0.0; self.stride];
        self.row(i, &mut scratch)[k]
    }

    #[inline]
    fn row<'a>(&'a self, i: usize, scratch: &'a mut [f64]) -> &'a [f64] {
        match &self.matrix {
            Some(mat) => &mat[i * self.stride..i * self.stride + self.m],
            None => {
                self.system.eval_into(&self.points[i * self.dim..(i + 1) * self.dim], scratch);
                &scratch[..self.m]
            }
        }
    }

    /// `A U` for `r` right-hand sides; `u` is `m × r` row-major, the result `n × r`.
    ///
    /// Every column is summed in the same order as [`crate::numeric::dot`],
    /// so a column of a multi-column product equals the single product.
    pub fn apply_multi(&self, u: &[f64], r: usize) -> Vec<f64> {
        assert_eq!(u.len(), self.m * r);
        match r {
            1 => self.apply_fixed::<1>(u),
            2 => self.apply_fixed::<2>(u),
            3 => self.apply_fixed::<3>(u),
            4 => self.apply_fixed::<4>(u),
            _ => {
                // Column by column through the single-column kernel.
                let n = self.n();
                let mut out = vec![0.0; n * r];
                for j in 0..r {
                    let col: Vec<f64> = (0..self.m).map(|k| u[k * r + j]).collect();
                    for (i, v) in self.apply_fixed::<1>(&col).into_iter().enumerate() {
                        out[i * r + j] = v;
                    }
                }
                out
            }
        }
    }

    fn apply_fixed<const R: usize>(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * R];
        out.par_chunks_mut(BLOCK * R).enumerate().for_each(|(b, chunk)| {
            let mut scratch = vec![0.0; self.stride];
            for (li, o) in chunk.chunks_mut(R).enumerate() {
                let i = b * BLOCK + li;
                let row = self.row(i, &mut scratch);
                let mut s = [[0.0f64; R]; 4];
                let mut tail = [0.0f64; R];
                let full = row.len() / 4 * 4;
                for (k, &lk) in row.iter().enumerate().skip(full) {
                    for j in 0..R {
                        tail[j] += lk * u[k * R + j];
                    }
                }
                for (c, quad) in row[..full].chunks_exact(4).enumerate() {
                    let base = c * 4 * R;
                    for (l, &lk) in quad.iter().enumerate() {
                        let uk = &u[base + l * R..base + (l + 1) * R];
                        for j in 0..R {
                            s[l][j] += lk * uk[j];
                        }
                    }
                }
                let sw = self.sqrt_w[i];
                for j in 0..R {
                    o[j] = sw * ((s[0][j] + s[1][j]) + (s[2][j] + s[3][j]) + tail[j]);
                }
            }
        });
        out
    }

    /// `Aᵀ V` for `r` right-hand sides; `v` is `n × r` row-major, the result `m × r`.
    pub fn adjoint_multi(&self, v: &[f64], r: usize) -> Vec<f64> {
        let n = self.n();
        assert_eq!(v.len(), n * r);
        match r {
            1 => self.adjoint_fixed::<1>(v),
            2 => self.adjoint_fixed::<2>(v),
            3 => self.adjoint_fixed::<3>(v),
            4 => self.adjoint_fixed::<4>(v),
            _ => {
                let m = self.m;
                let mut out = vec![0.0; m * r];
                for j in 0..r {
                    let col: Vec<f64> = (0..n).map(|i| v[i * r + j]).collect();
                    for (k, x) in self.adjoint_fixed::<1>(&col).into_iter().enumerate() {
                        out[k * r + j] = x;
                    }
                }
                out
            }
        }
    }

    fn adjoint_fixed<const R: usize>(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let m = self.m;
        let n_blocks = n.div_ceil(BLOCK);
        let groups = n_blocks.min(MAX_GROUPS);
        let per_group = n_blocks.div_ceil(groups);
        let partials: Vec<Vec<f64>> = (0..groups)
            .into_par_iter()
            .map(|g| {
                let mut part = vec![0.0; m * R];
                let mut scratch = vec![0.0; self.stride];
                let start = (g * per_group * BLOCK).min(n);
                let end = ((g + 1) * per_group * BLOCK).min(n);
                for i in start..end {
                    let sw = self.sqrt_w[i];
                    let mut c = [0.0f64; R];
                    for j in 0..R {
                        c[j] = sw * v[i * R + j];
                    }
                    let row = self.row(i, &mut scratch);
                    for (pk, &lk) in part.chunks_exact_mut(R).zip(row) {
                        for j in 0..R {
                            pk[j] += lk * c[j];
                        }
                    }
                }
                part
            })
            .collect();
        let mut out = vec![0.0; m * R];
        for part in &partials {
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
        out
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_multi(u, 1)
    }

    pub fn apply_adjoint(&self, v: &[f64]) -> Vec<f64> {
        self.adjoint_multi(v, 1)
    }

    /// `W^{1/2} y`.
    pub fn weighted_rhs(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(self.sqrt_w.iter()).map(|(a, b)| a * b).collect()
    }
}
