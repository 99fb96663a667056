//! One-dimensional orthonormal systems on `[0, 1]`.
//!
//! Four families are provided: shifted Legendre polynomials and Chebyshev
//! polynomials (orthonormal for the Lebesgue and Chebyshev measure
//! respectively), and the eigenbases of the embeddings `H¹ ↪ L₂` and
//! `H² ↪ L₂`.

mod h2;
mod roots;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::cos_pi_dd;
use crate::numeric::two_prod;

pub use h2::{eval_h2_exact, eval_h2_rearranged, eval_h2_stable, stable_envelope};
pub use roots::{root_bracket, root_residual, solve_tk, t_tilde, EigenRootTable, ROOT_TOL};

/// Default index from which the H² family switches to the asymptotic form.
pub const DEFAULT_H2_SWITCH: usize = 14;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
/// `η_0` for Chebyshev: the measure has mass `π/2`.
const CHEB_C0: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
/// `η_k / T_k` for Chebyshev, `k >= 1`.
const CHEB_CK: f64 = 1.128_379_167_095_512_6; // 2/sqrt(pi)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    Legendre,
    Chebyshev,
    H1,
    H2,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [FamilyId::Legendre, FamilyId::Chebyshev, FamilyId::H1, FamilyId::H2];

    /// Measure in which the family is orthonormal.
    pub fn measure(self) -> MeasureId {
        match self {
            FamilyId::Chebyshev => MeasureId::Chebyshev,
            _ => MeasureId::Lebesgue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Legendre => "legendre",
            FamilyId::Chebyshev => "chebyshev",
            FamilyId::H1 => "h1",
            FamilyId::H2 => "h2",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(FamilyId::Legendre),
            "chebyshev" => Ok(FamilyId::Chebyshev),
            "h1" => Ok(FamilyId::H1),
            "h2" => Ok(FamilyId::H2),
            other => Err(Error::Parse(format!("unknown basis family '{other}'"))),
        }
    }
}

/// Measure on `[0, 1]` in which a family is orthonormal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureId {
    /// `dx`, total mass 1.
    Lebesgue,
    /// `(1 - (2x-1)²)^{-1/2} dx`, total mass `π/2`.
    Chebyshev,
}

impl MeasureId {
    /// Density with respect to `dx`.
    pub fn density(self, x: f64) -> f64 {
        match self {
            MeasureId::Lebesgue => 1.0,
            MeasureId::Chebyshev => 1.0 / (2.0 * (x * (1.0 - x)).sqrt()),
        }
    }

    pub fn total_mass(self) -> f64 {
        match self {
            MeasureId::Lebesgue => 1.0,
            MeasureId::Chebyshev => 0.5 * PI,
        }
    }
}

/// A 1D orthonormal system together with its evaluation data.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    id: FamilyId,
    h2_switch_index: usize,
    roots: Arc<EigenRootTable>,
}

impl BasisFamily {
    pub fn new(id: FamilyId) -> Result<Self> {
        Self::with_switch(id, DEFAULT_H2_SWITCH)
    }

    /// Construct with a custom H² switch index (`>= 2`).
    pub fn with_switch(id: FamilyId, h2_switch_index: usize) -> Result<Self> {
        if h2_switch_index < 2 {
            return Err(invalid(format!("h2 switch index must be >= 2, got {h2_switch_index}")));
        }
        let k_max = if id == FamilyId::H2 { h2_switch_index - 1 } else { 1 };
        let roots = Arc::new(EigenRootTable::new(k_max, ROOT_TOL)?);
        Ok(Self { id, h2_switch_index, roots })
    }

    pub fn legendre() -> Self {
        Self::new(FamilyId::Legendre).expect("no roots needed")
    }

    pub fn chebyshev() -> Self {
        Self::new(FamilyId::Chebyshev).expect("no roots needed")
    }

    pub fn h1() -> Self {
        Self::new(FamilyId::H1).expect("no roots needed")
    }

    pub fn h2() -> Self {
        Self::new(FamilyId::H2).expect("roots below the default switch converge")
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn measure(&self) -> MeasureId {
        self.id.measure()
    }

    pub fn h2_switch_index(&self) -> usize {
        self.h2_switch_index
    }

    /// Sobolev smoothness of the eigenbasis families.
    pub fn smoothness(&self) -> Option<u8> {
        match self.id {
            FamilyId::H1 => Some(1),
            FamilyId::H2 => Some(2),
            _ => None,
        }
    }

    pub fn roots(&self) -> &EigenRootTable {
        &self.roots
    }

    /// `η_k(x)`.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        match self.id {
            FamilyId::Legendre => {
                let u = 2.0 * x - 1.0;
                let (mut p0, mut p1) = (1.0, u);
                if k == 0 {
                    return 1.0;
                }
                for j in 1..k {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf + 1.0) * u * p1 - jf * p0) / (jf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                (2.0 * k as f64 + 1.0).sqrt() * p1
            }
            FamilyId::Chebyshev => {
                if k == 0 {
                    return CHEB_C0;
                }
                let u = 2.0 * x - 1.0;
                let (mut t0, mut t1) = (1.0, u);
                for _ in 1..k {
                    let t2 = 2.0 * u * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                }
                CHEB_CK * t1
            }
            FamilyId::H1 => h1_eval(k, x),
            FamilyId::H2 => self.h2_eval(k, x),
        }
    }

    fn h2_eval(&self, k: usize, x: f64) -> f64 {
        match k {
            0 => 1.0,
            1 => SQRT_3 * (2.0 * x - 1.0),
            _ if k < self.h2_switch_index => {
                eval_h2_rearranged(x, self.roots.get(k).expect("root table covers the exact range"))
            }
            _ => eval_h2_stable(k, x),
        }
    }

    /// Fill `out[k] = η_k(x)` for `k < out.len()`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        match self.id {
            FamilyId::Legendre => {
                let u = 2.0 * x - 1.0;
                let (mut p0, mut p1) = (1.0, u);
                out[0] = 1.0;
                if m > 1 {
                    out[1] = SQRT_3 * u;
                }
                for k in 2..m {
                    let j = (k - 1) as f64;
                    let p2 = ((2.0 * j + 1.0) * u * p1 - j * p0) / (j + 1.0);
                    p0 = p1;
                    p1 = p2;
                    out[k] = (2.0 * k as f64 + 1.0).sqrt() * p2;
                }
            }
            FamilyId::Chebyshev => {
                let u = 2.0 * x - 1.0;
                let (mut t0, mut t1) = (1.0, u);
                out[0] = CHEB_C0;
                if m > 1 {
                    out[1] = CHEB_CK * u;
                }
                for o in out.iter_mut().skip(2) {
                    let t2 = 2.0 * u * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    *o = CHEB_CK * t2;
                }
            }
            FamilyId::H1 => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = h1_eval(k, x);
                }
            }
            FamilyId::H2 => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = self.h2_eval(k, x);
                }
            }
        }
    }

    /// `N(V_m, x) = Σ_{k<m} η_k(x)²`.
    pub fn christoffel(&self, m: usize, x: f64) -> f64 {
        let mut v = vec![0.0; m];
        self.eval_all(x, &mut v);
        v.iter().map(|e| e * e).sum()
    }

    /// Proven bound on `‖η_k‖∞`.
    pub fn sup_norm_bound(&self, k: usize) -> f64 {
        match (self.id, k) {
            (FamilyId::Legendre, _) => (2.0 * k as f64 + 1.0).sqrt(),
            (FamilyId::Chebyshev, 0) => CHEB_C0,
            (FamilyId::Chebyshev, _) => CHEB_CK,
            (FamilyId::H1, 0) => 1.0,
            (FamilyId::H1, _) => SQRT_2,
            (FamilyId::H2, 0) => 1.0,
            (FamilyId::H2, 1) => SQRT_3,
            (FamilyId::H2, _) => 6f64.sqrt(),
        }
    }

    /// `sup_x N(V_m, x)` bounded through the per-function sup norms.
    pub fn christoffel_sup_bound(&self, m: usize) -> f64 {
        (0..m).map(|k| self.sup_norm_bound(k).powi(2)).sum()
    }

    /// `σ_k²` of the embedding into `L₂`; only defined for the eigenbases.
    pub fn singular_value_sq(&self, k: usize) -> Result<f64> {
        match self.smoothness() {
            Some(s) => singular_value_sq(s, k),
            None => Err(invalid(format!("{} has no associated singular values", self.id))),
        }
    }
}

fn h1_eval(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (hi, lo) = two_prod(k as f64, x);
    SQRT_2 * cos_pi_dd(hi, lo)
}

/// `σ_k²` for smoothness `s ∈ {1, 2}`.
pub fn singular_value_sq(s: u8, k: usize) -> Result<f64> {
    match s {
        1 => {
            let kf = k as f64;
            Ok(1.0 / (1.0 + PI * PI * kf * kf))
        }
        2 => {
            if k < 2 {
                Ok(1.0)
            } else {
                let t = solve_tk(k, ROOT_TOL)?;
                Ok(1.0 / (1.0 + t.powi(4)))
            }
        }
        _ => Err(invalid(format!("smoothness must be 1 or 2, got {s}"))),
    }
}
