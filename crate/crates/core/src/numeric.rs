//! Small floating-point helpers shared across modules.

use std::f64::consts::PI;

/// Low part of the double-double split of pi.
pub(crate) const PI_LO: f64 = 1.2246467991473532e-16;

/// Exact product `a * b = hi + lo`.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// Exact sum `a + b = s + e`.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `cos(pi * (hi + lo))` with exact reduction of the leading part.
///
/// Accurate to a few ulps even when `hi` is large, as long as `hi + lo`
/// represents the intended argument to double-double precision.
pub fn cos_pi_dd(hi: f64, lo: f64) -> f64 {
    // hi - 2*round(hi/2) is exact for all finite doubles.
    let r = hi - 2.0 * (hi * 0.5).round();
    let (r, e) = two_sum(r, lo);
    let r_total = r + e;
    // Fold into [-1/4, 1/4] around a multiple of 1/2.
    let q = (r_total * 2.0).round();
    let (f, fe) = two_sum(r - q * 0.5, e);
    let (y, ye) = two_prod(PI, f);
    let tail = ye + PI_LO * f + PI * fe;
    let (s, c) = (y + tail).sin_cos();
    match (q as i64).rem_euclid(4) {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

/// `cos(pi * (a * x + c))` with `a * x` formed exactly.
pub fn cos_pi_affine(a: f64, x: f64, c: f64) -> f64 {
    let (p, pe) = two_prod(a, x);
    let (s, se) = two_sum(p, c);
    cos_pi_dd(s, se + pe)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated dot product.
pub fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (p, pe) = two_prod(x, y);
        let (t, te) = two_sum(s, p);
        s = t;
        c += te + pe;
    }
    s + c
}

/// Dot product with four interleaved partial sums.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    let mut s = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            s[j] += x[j] * y[j];
        }
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
