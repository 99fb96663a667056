//! Evaluators for the H² eigenfunctions with index `k >= 2`.

use crate::numeric::cos_pi_affine;

use super::roots::t_tilde;

/// Closed form as written, in plain double arithmetic.
///
/// Loses all accuracy for moderate `k` because `cosh` and `sinh` cancel.
pub fn eval_h2_exact(_k: usize, x: f64, t: f64) -> f64 {
    let tx = t * x;
    let c = (t.cosh() - t.cos()) / (t.sinh() - t.sin());
    tx.cosh() + tx.cos() - c * (tx.sinh() + tx.sin())
}

/// Same function as [`eval_h2_exact`], regrouped so that no large terms cancel.
///
/// With `c = cos t - sin t - e^{-t}` and `D = 1 - e^{-2t} - 2 sin(t) e^{-t}`:
/// `e^{-tx} + c·e^{t(x-1)}(1 - e^{-2tx})/D + cos(tx) - (1 - 2c·e^{-t}/D)·sin(tx)`.
pub fn eval_h2_rearranged(x: f64, t: f64) -> f64 {
    let tx = t * x;
    let em = (-t).exp();
    let (st, ct) = t.sin_cos();
    let c = ct - st - em;
    let d = -(-2.0 * t).exp_m1() - 2.0 * st * em;
    let ratio = (t * (x - 1.0)).exp() * -(-2.0 * tx).exp_m1() / d;
    let b = 1.0 - 2.0 * c * em / d;
    let (s, co) = tx.sin_cos();
    (-tx).exp() + c * ratio + co - b * s
}

/// Asymptotic form `√2 cos(t̃x + π/4) + boundary layers`, `t̃ = (2k-1)π/2`.
///
/// Both boundary terms are included at `x = 1/2`.
pub fn eval_h2_stable(k: usize, x: f64) -> f64 {
    let tt = t_tilde(k);
    let mut v = std::f64::consts::SQRT_2 * cos_pi_affine((2 * k - 1) as f64 * 0.5, x, 0.25);
    if x <= 0.5 {
        v += (-tt * x).exp();
    }
    if x >= 0.5 {
        let e = (-tt * (1.0 - x)).exp();
        v += if k % 2 == 0 { e } else { -e };
    }
    v
}

/// Envelope `16 e^{-π(k-1)/2}` on `|exact - stable|`.
pub fn stable_envelope(k: usize) -> f64 {
    16.0 * (-std::f64::consts::PI * (k as f64 - 1.0) * 0.5).exp()
}
