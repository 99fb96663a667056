//! The kinked B-spline test function, its expansion coefficients and exact
//! error evaluation through Parseval's identity.

use std::io::Write;

use rayon::prelude::*;

use crate::basis1d::{BasisFamily, MeasureId};
use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;
use crate::quadrature::AdaptiveIntegrator;
use crate::sampling::format_f64;
use crate::tensor::{HyperbolicCross, MultiIndex};

/// `∫_0^1 B₂^cut`.
pub const B2CUT_INTEGRAL: f64 = 23.0 / 48.0;
/// `‖B₂^cut‖²_{L₂}`.
pub const B2CUT_NORM_SQ: f64 = 35.0 / 128.0;
/// `max - min` of the 1D function.
pub const B2CUT_RANGE: f64 = 5.0 / 8.0;

/// Absolute tolerance for coefficient quadrature.
pub const COEFF_TOL: f64 = 1e-13;

/// `-x² + 3/4` on `[0, 1/2]`, `x²/2 - 3x/2 + 9/8` on `[1/2, 1]`.
pub fn b2cut(x: f64) -> f64 {
    if x <= 0.5 {
        -x * x + 0.75
    } else {
        0.5 * x * x - 1.5 * x + 1.125
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    B2cut1d,
    /// `Π_j B₂^cut(x_j)`.
    B2cutTensor(usize),
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::B2cut1d => 1,
            TestFunction::B2cutTensor(d) => *d,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| b2cut(v)).product()
    }

    /// `‖f‖²_{L₂}` for the Lebesgue measure.
    pub fn norm_sq(&self) -> f64 {
        B2CUT_NORM_SQ.powi(self.dim() as i32)
    }

    /// Noise scale `M`; `5/8` for every dimension.
    pub fn range(&self) -> f64 {
        B2CUT_RANGE
    }
}

/// Coefficients `f̂_k = ⟨f, η_k⟩` with quadrature error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub label: String,
    pub indices: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    pub errors: Vec<f64>,
}

impl CoefficientTable {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Tensor coefficients as products of 1D coefficients, in cross order.
    pub fn tensor(cross: &HyperbolicCross, one_d: &CoefficientTable) -> Result<Self> {
        let need = cross.max_per_coordinate().into_iter().max().unwrap_or(0) + 1;
        if one_d.len() < need {
            return Err(invalid(format!("1D table has {} entries, cross needs {need}", one_d.len())));
        }
        let mut coefficients = Vec::with_capacity(cross.len());
        let mut errors = Vec::with_capacity(cross.len());
        for idx in cross.indices() {
            let ks = idx.components();
            let c: f64 = ks.iter().map(|&k| one_d.coefficients[k]).product();
            // First-order propagation: Σ_j err_j Π_{i≠j} |c_i|.
            let err: f64 = (0..ks.len())
                .map(|j| {
                    let others: f64 = ks
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, &k)| one_d.coefficients[k].abs())
                        .product();
                    one_d.errors[ks[j]] * others
                })
                .sum();
            coefficients.push(c);
            errors.push(err);
        }
        Ok(Self {
            label: format!("{} d={}", one_d.label, cross.dim()),
            indices: cross.indices().to_vec(),
            coefficients,
            errors,
        })
    }

    /// CSV with columns `index, coefficient, quadrature_error`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "coefficient", "quadrature_error"])?;
        for ((idx, c), e) in self.indices.iter().zip(&self.coefficients).zip(&self.errors) {
            wr.write_record([idx.to_string(), format_f64(*c), format_f64(*e)])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// `Σ_{k<m} f̂_k²`.
    pub fn energy(&self, m: usize) -> f64 {
        compensated_sum(self.coefficients[..m.min(self.len())].iter().map(|c| c * c))
    }
}

/// Integrate `g(x) η_k(x) dμ` for `k` in `range` over the two smooth pieces.
fn integrate_against<G>(
    family: &BasisFamily,
    range: std::ops::Range<usize>,
    g: &G,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    G: Fn(f64) -> f64 + Sync,
{
    let len = range.len();
    let mut buf = vec![0.0; range.end];
    let q = AdaptiveIntegrator::new(tol);
    let (pieces, map): ([(f64, f64); 2], fn(f64) -> (f64, f64)) = match family.measure() {
        MeasureId::Lebesgue => ([(0.0, 0.5), (0.5, 1.0)], |x| (x, 1.0)),
        // x = (1 - cos θ)/2 turns dμ into dθ/2.
        MeasureId::Chebyshev => {
            ([(0.0, std::f64::consts::FRAC_PI_2), (std::f64::consts::FRAC_PI_2, std::f64::consts::PI)], |th| {
                (0.5 * (1.0 - th.cos()), 0.5)
            })
        }
    };
    let mut integrand = |s: f64, out: &mut [f64]| {
        let (x, jac) = map(s);
        family.eval_all(x, &mut buf);
        let gx = g(x) * jac;
        for (o, e) in out.iter_mut().zip(&buf[range.start..]) {
            *o = gx * e;
        }
    };
    let mut total = vec![0.0; len];
    let mut err = vec![0.0; len];
    for (a, b) in pieces {
        let (v, e) = q.integrate_with_error(a, b, len, &mut integrand)?;
        for j in 0..len {
            total[j] += v[j];
            err[j] += e[j];
        }
    }
    Ok((total, err))
}

/// `⟨g, η_k⟩_{L₂(μ)}` for `k < m` by adaptive Gauss–Legendre quadrature split at `x = 1/2`.
pub fn coefficients_1d_of<G>(family: &BasisFamily, m: usize, g: G, tol: f64) -> Result<CoefficientTable>
where
    G: Fn(f64) -> f64 + Sync,
{
    const CHUNK: usize = 64;
    let chunks: Vec<_> = (0..m.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(m)).collect();
    let parts = chunks.into_par_iter().map(|r| integrate_against(family, r, &g, tol)).collect::<Result<Vec<_>>>()?;
    let mut coefficients = Vec::with_capacity(m);
    let mut errors = Vec::with_capacity(m);
    for (c, e) in parts {
        coefficients.extend(c);
        errors.extend(e);
    }
    Ok(CoefficientTable {
        label: family.id().to_string(),
        indices: (0..m).map(|k| MultiIndex(vec![k])).collect(),
        coefficients,
        errors,
    })
}

/// Coefficients of `B₂^cut` in the first `m` functions of `family`.
pub fn coefficients_1d(family: &BasisFamily, m: usize) -> Result<CoefficientTable> {
    coefficients_1d_of(family, m, b2cut, COEFF_TOL)
}

/// `‖B₂^cut - Σ_{k<m} f̂_k η_k‖²_{L₂(μ)}` by quadrature of the residual.
///
/// Avoids the cancellation in `‖f‖² - Σ f̂_k²` when the tail is tiny.
pub fn truncation_error_1d(family: &BasisFamily, table: &CoefficientTable, m: usize) -> Result<f64> {
    if table.len() < m {
        return Err(Error::DimensionMismatch { expected: m, got: table.len() });
    }
    let coeffs = &table.coefficients[..m];
    let residual_sq = |x: f64| {
        let mut buf = vec![0.0; m];
        family.eval_all(x, &mut buf);
        let approx: f64 = compensated_sum(buf.iter().zip(coeffs).map(|(e, c)| e * c));
        (b2cut(x) - approx).powi(2)
    };
    let pieces = 2 * m.div_ceil(8).max(1);
    let measure = family.measure();
    let integrate = |tol: f64| -> Result<f64> {
        let q = AdaptiveIntegrator::new(tol);
        let mut sum = 0.0;
        for p in 0..pieces {
            let (a, b) = (p as f64 / pieces as f64, (p + 1) as f64 / pieces as f64);
            sum += match measure {
                MeasureId::Lebesgue => q.integrate_scalar(a, b, residual_sq)?,
                MeasureId::Chebyshev => {
                    let (ta, tb) = (a * std::f64::consts::PI, b * std::f64::consts::PI);
                    q.integrate_scalar(ta, tb, |th| 0.5 * residual_sq(0.5 * (1.0 - th.cos())))?
                }
            };
        }
        Ok(sum)
    };
    let rough = integrate(1e-6)?;
    integrate((rough * 1e-9).max(1e-300))
}

/// `‖f - P_m f‖² = ‖f‖² - Σ_{k<m} f̂_k²`, clamped at zero.
pub fn truncation_error_from_norm(norm_sq: f64, table: &CoefficientTable, m: usize) -> f64 {
    (norm_sq - table.energy(m)).max(0.0)
}

/// Parseval decomposition of `‖f - S_m y‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalError {
    pub total: f64,
    pub truncation: f64,
    pub discretization: f64,
}

/// `tail + Σ_k (f̂_k - ĝ_k)²`.
pub fn parseval_error(coefficients: &[f64], table: &CoefficientTable, truncation: f64) -> Result<ParsevalError> {
    if table.len() < coefficients.len() {
        return Err(Error::DimensionMismatch { expected: coefficients.len(), got: table.len() });
    }
    let discretization = compensated_sum(coefficients.iter().zip(&table.coefficients).map(|(g, f)| (f - g).powi(2)));
    Ok(ParsevalError { total: truncation + discretization, truncation, discretization })
}
