//! Closed-form error bounds for weighted least squares and the
//! concentration inequalities behind them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters of a bound evaluation.
///
/// `e2` and `e_inf` are the L₂-projection errors measured in L₂ and L∞.
/// The L∞ bound is stated for best-L∞-approximation errors; supply them via
/// `linf_e_inf` / `linf_e2`, otherwise the L₂-projection values are used,
/// which bound the L∞-projection quantity from above only for `linf_e_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    /// `‖N(V_m, ·)/ρ‖∞`.
    pub sup_ratio: f64,
    /// `‖1/ρ‖∞`; may be infinite.
    #[serde(default = "one")]
    pub sup_inv_density: f64,
    #[serde(default)]
    pub e2: f64,
    #[serde(default)]
    pub e_inf: f64,
    #[serde(default)]
    pub sigma2: f64,
    /// Noise bound `B`.
    #[serde(default, alias = "B")]
    pub noise_bound: f64,
    /// `N(V_m) = ‖N(V_m, ·)‖∞`.
    #[serde(default)]
    pub n_sup: f64,
    #[serde(default)]
    pub linf_e_inf: Option<f64>,
    #[serde(default)]
    pub linf_e2: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid("m and n must be >= 1"));
        }
        let named = [
            ("t", self.t),
            ("sup_ratio", self.sup_ratio),
            ("e2", self.e2),
            ("e_inf", self.e_inf),
            ("sigma2", self.sigma2),
            ("noise_bound", self.noise_bound),
            ("n_sup", self.n_sup),
            ("linf_e_inf", self.linf_e_inf.unwrap_or(0.0)),
            ("linf_e2", self.linf_e2.unwrap_or(0.0)),
        ];
        for (name, v) in named {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.sup_inv_density >= 0.0) {
            return Err(invalid(format!("sup_inv_density must be >= 0, got {}", self.sup_inv_density)));
        }
        if self.t > self.n as f64 {
            log::warn!("t = {} exceeds n = {}; the bounds assume t <= n", self.t, self.n);
        }
        Ok(())
    }

    fn ratio(&self) -> f64 {
        (self.t / self.n as f64).sqrt()
    }

    /// `(m/n)(14 B √(tσ²) + σ²) + 128 B² t / n`.
    fn noise_bracket(&self) -> f64 {
        let n = self.n as f64;
        (self.m as f64 / n) * (14.0 * self.noise_bound * (self.t * self.sigma2).sqrt() + self.sigma2)
            + 128.0 * self.noise_bound.powi(2) * self.t / n
    }
}

/// Evaluated right-hand sides and their probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub condition_ok: bool,
    pub rhs_l2_noiseless: f64,
    pub rhs_l2_noisy: f64,
    pub rhs_linf: f64,
    /// Probability that the noisy L₂ bound fails, `min(1, 3e^{-t})`.
    pub failure_probability: f64,
    pub prob_l2_noiseless: f64,
    pub prob_l2_noisy: f64,
    pub prob_linf: f64,
}

/// `10 ‖N/ρ‖∞ (ln m + t) <= n`.
pub fn sampling_condition(m: usize, n: usize, t: f64, sup_ratio: f64) -> bool {
    10.0 * sup_ratio * ((m as f64).ln() + t) <= n as f64
}

/// `max(0, 1 - c e^{-t})`.
pub fn success_probability(c: f64, t: f64) -> f64 {
    (1.0 - c * (-t).exp()).max(0.0)
}

/// `8 (e2 + √(t/n) e∞)²`, holding with probability `1 - 2e^{-t}`.
pub fn bound_l2_noiseless(p: &BoundInputs) -> f64 {
    8.0 * (p.e2 + p.ratio() * p.e_inf).powi(2)
}

/// `14 (e2 + √(t/n) e∞)² + 4‖1/ρ‖∞ ((m/n)(14B√(tσ²) + σ²) + 128B²t/n)`,
/// holding with probability `1 - 3e^{-t}`.
pub fn bound_l2_noisy(p: &BoundInputs) -> f64 {
    let trunc = 14.0 * (p.e2 + p.ratio() * p.e_inf).powi(2);
    let bracket = p.noise_bracket();
    let noise = if bracket == 0.0 { 0.0 } else { 4.0 * p.sup_inv_density * bracket };
    trunc + noise
}

/// `(1 + √(5N)) (e∞ + √(t/n) e2) + √(2‖1/ρ‖∞ N) √(noise bracket)`,
/// holding with probability `1 - 3e^{-t}`.
pub fn bound_linf(p: &BoundInputs) -> f64 {
    let e_inf = p.linf_e_inf.unwrap_or(p.e_inf);
    let e2 = p.linf_e2.unwrap_or(p.e2);
    let approx = (1.0 + (5.0 * p.n_sup).sqrt()) * (e_inf + p.ratio() * e2);
    let bracket = p.noise_bracket();
    let noise = if bracket == 0.0 { 0.0 } else { (2.0 * p.sup_inv_density * p.n_sup).sqrt() * bracket.sqrt() };
    approx + noise
}

/// Bernstein deviation level `2Bt/(3n) + √(2σ²t/n)`.
pub fn bernstein_tail(n: usize, t: f64, sigma2: f64, b: f64) -> f64 {
    let n = n as f64;
    2.0 * b * t / (3.0 * n) + (2.0 * sigma2 * t / n).sqrt()
}

/// Level for `‖Aξ‖²`: `128 B² ‖A‖² t + (8√3 B √(tσ²) + σ²) ‖A‖_F²`.
pub fn hanson_wright_level(a_op: f64, a_frob: f64, t: f64, sigma2: f64, b: f64) -> f64 {
    128.0 * b * b * a_op * a_op * t + (8.0 * 3f64.sqrt() * b * (t * sigma2).sqrt() + sigma2) * a_frob * a_frob
}

/// Matrix Chernoff tails for deviation `δ ∈ [0, 1]` with `R = sup_ratio / n`:
/// `(min(1, m e^{-δ²/(2R)}), min(1, m e^{-δ²/(3R)}))`.
pub fn chernoff_tail_probs(m: usize, n: usize, sup_ratio: f64, delta: f64) -> (f64, f64) {
    let r = sup_ratio / n as f64;
    let m = m as f64;
    if r == 0.0 {
        return if delta > 0.0 { (0.0, 0.0) } else { (m.min(1.0), m.min(1.0)) };
    }
    let p_min = (m * (-delta * delta / (2.0 * r)).exp()).min(1.0);
    let p_max = (m * (-delta * delta / (3.0 * r)).exp()).min(1.0);
    (p_min, p_max)
}

/// Evaluate every bound for `inputs`.
pub fn evaluate(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let condition_ok = sampling_condition(inputs.m, inputs.n, inputs.t, inputs.sup_ratio);
    if !condition_ok {
        log::info!("sampling condition violated; bounds are reported but not guaranteed");
    }
    let t = inputs.t;
    Ok(BoundReport {
        condition_ok,
        rhs_l2_noiseless: bound_l2_noiseless(inputs),
        rhs_l2_noisy: bound_l2_noisy(inputs),
        rhs_linf: bound_linf(inputs),
        failure_probability: (3.0 * (-t).exp()).min(1.0),
        prob_l2_noiseless: success_probability(2.0, t),
        prob_l2_noisy: success_probability(3.0, t),
        prob_linf: success_probability(3.0, t),
    })
}
