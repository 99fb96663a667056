//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rug::float::Constant;
use rug::Float;

/// Working precision in bits that keeps `cosh(t)` cancellation harmless.
fn precision_for(t: f64) -> u32 {
    (256.0 + 3.0 * t) as u32
}

/// `(2k - 1)π/2` in multiple precision.
pub fn t_tilde_mp(k: usize, prec: u32) -> Float {
    let pi = Float::with_val(prec, Constant::Pi);
    pi * Float::with_val(prec, 2 * k - 1) / 2u32
}

/// Root of `cosh(t) cos(t) = 1` near `(2k-1)π/2`, by Newton iteration in MPFR.
pub fn t_k_mp(k: usize, prec: u32) -> Float {
    let mut t = t_tilde_mp(k, prec);
    // Rough start from a double-precision bracket search.
    let lo = if k % 2 == 0 {
        (2 * k - 1) as f64 * std::f64::consts::FRAC_PI_2
    } else {
        (k - 1) as f64 * std::f64::consts::PI
    };
    let hi =
        if k % 2 == 0 { k as f64 * std::f64::consts::PI } else { (2 * k - 1) as f64 * std::f64::consts::FRAC_PI_2 };
    let g = |t: f64| t.cos() - 1.0 / t.cosh();
    let (mut a, mut b) = (lo, hi);
    if g(a).signum() != g(b).signum() {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m).signum() == g(a).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        t = Float::with_val(prec, 0.5 * (a + b));
    }
    for _ in 0..60 {
        let c = t.clone().cos();
        let s = t.clone().sin();
        let ch = t.clone().cosh();
        let sh = t.clone().sinh();
        // f = cos t - sech t, f' = -sin t + sinh t / cosh² t
        let f = c - Float::with_val(prec, 1) / ch.clone();
        let df = -s + sh / (ch.clone() * ch);
        let step = f / df;
        t -= &step;
        let tiny = match (step.get_exp(), t.get_exp()) {
            (Some(es), Some(et)) => es < et - prec as i32 + 4,
            _ => true,
        };
        if tiny {
            break;
        }
    }
    t
}

/// MPFR evaluation of the literal H² closed form for one index.
pub struct H2Oracle {
    t: Float,
    c: Float,
}

impl H2Oracle {
    pub fn new(k: usize) -> Self {
        let prec = precision_for((2 * k - 1) as f64 * std::f64::consts::FRAC_PI_2);
        let t = t_k_mp(k, prec);
        let c = (t.clone().cosh() - t.clone().cos()) / (t.clone().sinh() - t.clone().sin());
        Self { t, c }
    }

    /// `cosh(tx) + cos(tx) - c (sinh(tx) + sin(tx))`.
    pub fn eval(&self, x: f64) -> f64 {
        let prec = self.t.prec();
        let tx = Float::with_val(prec, &self.t * x);
        let v = tx.clone().cosh() + tx.clone().cos() - self.c.clone() * (tx.clone().sinh() + tx.sin());
        v.to_f64()
    }

    pub fn root(&self) -> f64 {
        self.t.to_f64()
    }
}

/// `(2k - 1)π/2` rounded to double through MPFR.
pub fn t_tilde_f64(k: usize) -> f64 {
    t_tilde_mp(k, 256).to_f64()
}

pub fn t_tilde_mp_default(k: usize) -> Float {
    t_tilde_mp(k, 256)
}

/// Exact rational helpers.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

/// Polynomial with rational coefficients, lowest degree first.
pub type Poly = Vec<BigRational>;

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_eval(p: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// `∫_a^b p(x) dx` exactly.
pub fn poly_integrate(p: &Poly, a: &BigRational, b: &BigRational) -> BigRational {
    let mut anti = vec![BigRational::zero()];
    for (i, c) in p.iter().enumerate() {
        anti.push(c / BigRational::from_integer(BigInt::from(i as i64 + 1)));
    }
    poly_eval(&anti, b) - poly_eval(&anti, a)
}

/// Shifted Legendre polynomial `P_k(2x - 1)` (not normalized), from the
/// explicit sum `Σ_j (-1)^{k+j} C(k,j) C(k+j,j) x^j`.
pub fn shifted_legendre(k: usize) -> Poly {
    (0..=k)
        .map(|j| {
            let c = binom(k, j) * binom(k + j, j);
            let sign = if (k + j) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            BigRational::from_integer(sign * c)
        })
        .collect()
}

pub fn binom(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// The two pieces of B₂^cut as rational polynomials, with their intervals.
pub fn b2cut_pieces() -> [(Poly, BigRational, BigRational); 2] {
    [
        (vec![rat(3, 4), rat(0, 1), rat(-1, 1)], rat(0, 1), rat(1, 2)),
        (vec![rat(9, 8), rat(-3, 2), rat(1, 2)], rat(1, 2), rat(1, 1)),
    ]
}

/// `∫_a^b (c0 + c1 x + c2 x²) cos(ω x) dx` by repeated integration by parts.
pub fn quad_times_cos(c: [f64; 3], omega: f64, a: f64, b: f64) -> f64 {
    let anti = |x: f64| {
        let p = c[0] + c[1] * x + c[2] * x * x;
        let dp = c[1] + 2.0 * c[2] * x;
        let ddp = 2.0 * c[2];
        let (s, co) = (omega * x).sin_cos();
        p * s / omega + dp * co / (omega * omega) - ddp * s / omega.powi(3)
    };
    anti(b) - anti(a)
}

/// All multi-indices in `[0, k_max]^d` whose coordinate-order product of
/// `sigma[k_j]` is at least `r`.
pub fn brute_force_cross(sigma: &[f64], d: usize, r: f64) -> Vec<Vec<usize>> {
    let k_max = sigma.len() - 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let mut p = 1.0;
        for &k in &idx {
            p *= sigma[k];
        }
        if p >= r {
            out.push(idx.clone());
        }
        let mut j = 0;
        loop {
            if j == d {
                return out;
            }
            idx[j] += 1;
            if idx[j] <= k_max {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Gauss–Chebyshev nodes on `[0, 1]` for `dμ = (1-(2x-1)²)^{-1/2} dx`,
/// with equal weights `π/(2N)`.
pub fn gauss_chebyshev(n: usize) -> (Vec<f64>, f64) {
    let nodes = (1..=n)
        .map(|i| {
            let u = ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            0.5 * (1.0 + u)
        })
        .collect();
    (nodes, std::f64::consts::PI / (2 * n) as f64)
}

/// Independent transcription of the printed expressions, expanded term by term.
pub mod reference {
    pub fn l2_noisy(e2: f64, einf: f64, m: f64, n: f64, t: f64, s2: f64, b: f64, inv_rho: f64) -> f64 {
        let a = e2 + (t / n).sqrt() * einf;
        let noise_inner = m / n * (14.0 * b * (t * s2).sqrt() + s2) + 128.0 * b * b * t / n;
        let four_over_rho = 4.0 * inv_rho;
        14.0 * a * a + if noise_inner > 0.0 { four_over_rho * noise_inner } else { 0.0 }
    }

    pub fn linf(einf: f64, e2: f64, nsup: f64, m: f64, n: f64, t: f64, s2: f64, b: f64, inv_rho: f64) -> f64 {
        let lead = 1.0 + (5.0 * nsup).sqrt();
        let radicand = m / n * (14.0 * b * (t * s2).sqrt() + s2) + 128.0 * b * b * t / n;
        lead * einf + lead * (t / n).sqrt() * e2 + ((2.0 * inv_rho) * nsup * radicand).sqrt()
    }

    pub fn bernstein(n: f64, t: f64, s2: f64, b: f64) -> f64 {
        (2.0 / 3.0) * b * (t / n) + (2.0 * s2 * (t / n)).sqrt()
    }

    pub fn hanson_wright(op_norm: f64, frob: f64, t: f64, s2: f64, b: f64) -> f64 {
        let sqrt3 = 3f64.sqrt();
        128.0 * (b * op_norm).powi(2) * t + 8.0 * sqrt3 * b * (t * s2).sqrt() * frob * frob + s2 * frob * frob
    }
}
