//! End-to-end runs: sample, fit, and compare the exact error with the bound.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis1d::{BasisFamily, FamilyId, DEFAULT_H2_SWITCH};
use crate::bounds::{bound_l2_noisy, sampling_condition, BoundInputs};
use crate::error::{invalid, Error, Result};
use crate::lsq::{
    extreme_singular_values, solve_weighted_lsq_multi, DesignOperator, OperatorMode, SpectrumMethod, DEFAULT_ITERATIONS,
};
use crate::numeric::compensated_sum;
use crate::sampling::{draw_samples, MeasurePair, NoiseModel};
use crate::system::Truncated1d;
use crate::tensor::{HyperbolicCross, TensorSystem};
use crate::testfn::{
    b2cut, coefficients_1d, parseval_error, truncation_error_1d, CoefficientTable, TestFunction, B2CUT_RANGE,
};

/// Largest materialized `n·m` allowed under the desk preset.
pub const DESK_MATERIALIZED_CAP: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Large runs: `m` up to 1000 in 1D, `n = 10⁶` matrix-free in 5D.
    Full,
    /// Runs sized for a workstation: `n·m <= 2·10⁸` stored entries.
    Desk,
}

/// Standard deviation `0.001·M` read as the 1D noise level.
pub fn default_noise_1d() -> NoiseModel {
    let sd = 1e-3 * B2CUT_RANGE;
    NoiseModel::truncated_gaussian(sd * sd)
}

/// `m = 2^lo_exp, …, 2^hi_exp`.
pub fn dyadic_grid(lo_exp: u32, hi_exp: u32) -> Vec<usize> {
    (lo_exp..=hi_exp).map(|e| 1usize << e).collect()
}

#[derive(Debug, Clone)]
pub struct Experiment1dConfig {
    pub family: FamilyId,
    pub n: usize,
    pub m_grid: Vec<usize>,
    pub noise: NoiseModel,
    pub seed: u64,
    pub t: f64,
    pub iterations: usize,
    pub measure: MeasurePair,
    pub spectrum: bool,
    pub h2_switch: usize,
    pub preset: Preset,
}

impl Experiment1dConfig {
    pub fn new(family: FamilyId, preset: Preset) -> Self {
        let m_grid = match preset {
            Preset::Desk => dyadic_grid(4, 9),
            Preset::Full => vec![16, 32, 64, 128, 256, 512, 1000],
        };
        let measure = MeasurePair::uniform_for(family.measure());
        Self {
            family,
            n: 10_000,
            m_grid,
            noise: default_noise_1d(),
            seed: 0,
            t: 1.0,
            iterations: DEFAULT_ITERATIONS,
            measure,
            spectrum: true,
            h2_switch: DEFAULT_H2_SWITCH,
            preset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return Err(invalid("m grid must be non-empty and positive"));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be >= 1"));
        }
        if !(self.t >= 0.0) {
            return Err(invalid("t must be >= 0"));
        }
        self.noise.validate()?;
        let m_max = *self.m_grid.iter().max().expect("non-empty");
        if self.preset == Preset::Desk && self.n.saturating_mul(m_max) > DESK_MATERIALIZED_CAP {
            return Err(Error::Resource(format!(
                "n*m = {} exceeds the desk cap of {DESK_MATERIALIZED_CAP}",
                self.n * m_max
            )));
        }
        if self.spectrum && m_max > self.n {
            return Err(invalid("singular values need n >= m"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row1d {
    pub m: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub err_total: f64,
    pub err_clean: f64,
    pub err_noise: f64,
    pub bound: f64,
}

/// Sup of `|f - P_m f|` on a uniform grid of 4097 points.
fn sup_residual(family: &BasisFamily, coeffs: &[f64]) -> f64 {
    let mut buf = vec![0.0; coeffs.len()];
    (0..=4096)
        .map(|i| {
            let x = i as f64 / 4096.0;
            family.eval_all(x, &mut buf);
            (b2cut(x) - compensated_sum(buf.iter().zip(coeffs).map(|(a, b)| a * b))).abs()
        })
        .fold(0.0, f64::max)
}

/// One row per `m`: singular values, split errors and the noisy L₂ bound.
pub fn run_experiment_1d(cfg: &Experiment1dConfig) -> Result<Vec<Row1d>> {
    cfg.validate()?;
    let family = BasisFamily::with_switch(cfg.family, cfg.h2_switch)?;
    if cfg.measure.error_measure() != family.measure() {
        return Err(invalid(format!("measure pair {} does not match family {}", cfg.measure, cfg.family)));
    }
    let m_max = *cfg.m_grid.iter().max().expect("validated");
    let table = coefficients_1d(&family, m_max)?;
    let samples =
        draw_samples(cfg.measure, cfg.n, 1, cfg.seed)?.with_values(|x| b2cut(x[0])).add_noise(&cfg.noise, cfg.seed)?;
    let mode = match cfg.preset {
        Preset::Desk => OperatorMode::Materialized,
        Preset::Full => OperatorMode::Auto,
    };
    let system = Arc::new(Truncated1d::new(family.clone(), m_max));
    let full = DesignOperator::new(system, &samples, mode)?;
    let y = samples.y();
    let clean = samples.clean_values();
    let noise = samples.noise();
    let sup_inv = cfg.measure.sup_inv_density(1);

    let mut rows = Vec::with_capacity(cfg.m_grid.len());
    for &m in &cfg.m_grid {
        let op = full.truncated(m)?;
        let fits = solve_weighted_lsq_multi(&op, &[&y, clean, noise], cfg.iterations)?;
        let tail = truncation_error_1d(&family, &table, m)?;
        let err_total = parseval_error(&fits[0].coefficients, &table, tail)?.total;
        let err_clean = parseval_error(&fits[1].coefficients, &table, tail)?.total;
        let err_noise = compensated_sum(fits[2].coefficients.iter().map(|c| c * c));
        let (s_min, s_max) = if cfg.spectrum {
            let sv = extreme_singular_values(&op, SpectrumMethod::Auto)?;
            (sv.s_min, sv.s_max)
        } else {
            (f64::NAN, f64::NAN)
        };
        let n_sup = family.christoffel_sup_bound(m);
        let sup_ratio = match cfg.measure {
            MeasurePair::ChebyshevUniform => f64::INFINITY,
            other => n_sup * other.sup_inv_density(1),
        };
        let inputs = BoundInputs {
            m,
            n: cfg.n,
            t: cfg.t,
            sup_ratio,
            sup_inv_density: sup_inv,
            e2: tail.sqrt(),
            e_inf: sup_residual(&family, &table.coefficients[..m]),
            sigma2: cfg.noise.variance,
            noise_bound: cfg.noise.bound,
            n_sup,
            linf_e_inf: None,
            linf_e2: None,
        };
        log::info!("m = {m}: err_total = {err_total:e}");
        rows.push(Row1d { m, s_min, s_max, err_total, err_clean, err_noise, bound: bound_l2_noisy(&inputs) });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct Experiment5dConfig {
    pub d: usize,
    pub n: usize,
    pub m_grid: Vec<usize>,
    /// Noise variances; each is truncated Gaussian at `6σ`.
    pub variances: Vec<f64>,
    pub seed: u64,
    pub t: f64,
    pub iterations: usize,
    pub mode: OperatorMode,
    pub preset: Preset,
}

impl Experiment5dConfig {
    pub fn new(preset: Preset) -> Self {
        let (n, m_grid, mode) = match preset {
            Preset::Desk => (100_000, vec![64, 128, 256, 512, 1024, 2000], OperatorMode::Materialized),
            Preset::Full => (1_000_000, vec![100, 300, 1000, 3000, 10_000], OperatorMode::MatrixFree),
        };
        Self {
            d: 5,
            n,
            m_grid,
            variances: vec![0.0, 0.01 * B2CUT_RANGE, 0.03 * B2CUT_RANGE],
            seed: 0,
            t: 6.0,
            iterations: DEFAULT_ITERATIONS,
            mode,
            preset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(invalid("d and n must be >= 1"));
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return Err(invalid("m grid must be non-empty and positive"));
        }
        if self.variances.is_empty() || self.variances.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("noise variances must be finite and >= 0"));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be >= 1"));
        }
        let m_max = *self.m_grid.iter().max().expect("non-empty");
        let entries = self.n.saturating_mul(m_max);
        if self.preset == Preset::Desk && self.mode != OperatorMode::MatrixFree && entries > DESK_MATERIALIZED_CAP {
            return Err(Error::Resource(format!("n*m = {entries} exceeds the desk cap of {DESK_MATERIALIZED_CAP}")));
        }
        if self.mode == OperatorMode::MatrixFree && entries > DESK_MATERIALIZED_CAP {
            log::warn!("matrix-free run with n*m = {entries}; expect a long wall-clock time");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row5d {
    pub m: usize,
    pub sigma2: f64,
    pub err_total: f64,
    pub bound: f64,
    pub condition_ok: bool,
}

/// Seed-independent data of the tensor experiment.
#[derive(Debug, Clone)]
pub struct Prepared5d {
    pub system: TensorSystem,
    pub table: CoefficientTable,
    pub function: TestFunction,
    /// `‖f - P_m f‖²` for each grid entry.
    pub tails: Vec<f64>,
    /// `Σ_k Π_j ‖η_{k_j}‖∞²` for each grid entry.
    pub n_sups: Vec<f64>,
}

pub fn prepare_5d(cfg: &Experiment5dConfig) -> Result<Prepared5d> {
    cfg.validate()?;
    let m_max = *cfg.m_grid.iter().max().expect("validated");
    let cross = Arc::new(HyperbolicCross::with_size(2, cfg.d, m_max)?);
    let family = BasisFamily::h2();
    let system = TensorSystem::new(family.clone(), cross.clone())?;
    let k_max = cross.max_per_coordinate().into_iter().max().unwrap_or(0);
    let one_d = coefficients_1d(&family, k_max + 1)?;
    let table = CoefficientTable::tensor(&cross, &one_d)?;
    let function = TestFunction::B2cutTensor(cfg.d);
    let tails = cfg.m_grid.iter().map(|&m| (function.norm_sq() - table.energy(m)).max(0.0)).collect();
    let n_sups = cfg.m_grid.iter().map(|&m| system.truncated(m).christoffel_sup_bound()).collect();
    Ok(Prepared5d { system, table, function, tails, n_sups })
}

/// All rows for one seed: every `m` in the grid and every noise variance.
pub fn run_5d_seed(cfg: &Experiment5dConfig, prep: &Prepared5d, seed: u64) -> Result<Vec<Row5d>> {
    let f = prep.function;
    let samples = draw_samples(MeasurePair::LebesgueUniform, cfg.n, cfg.d, seed)?.with_values(|x| f.eval(x));
    let models: Vec<NoiseModel> = cfg.variances.iter().map(|&v| NoiseModel::truncated_gaussian(v)).collect();
    let ys = models.iter().map(|model| Ok(samples.clone().add_noise(model, seed)?.y())).collect::<Result<Vec<_>>>()?;
    let full = DesignOperator::new(Arc::new(prep.system.clone()), &samples, cfg.mode)?;
    let y_refs: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
    let mut rows = Vec::new();
    for (gi, &m) in cfg.m_grid.iter().enumerate() {
        let op = full.truncated(m)?;
        let fits = solve_weighted_lsq_multi(&op, &y_refs, cfg.iterations)?;
        let tail = prep.tails[gi];
        let n_sup = prep.n_sups[gi];
        for (fit, model) in fits.iter().zip(&models) {
            let err_total = parseval_error(&fit.coefficients, &prep.table, tail)?.total;
            let e2 = tail.sqrt();
            let inputs = BoundInputs {
                m,
                n: cfg.n,
                t: cfg.t,
                sup_ratio: n_sup,
                sup_inv_density: 1.0,
                e2,
                e_inf: n_sup.sqrt() * e2,
                sigma2: model.variance,
                noise_bound: model.bound,
                n_sup,
                linf_e_inf: None,
                linf_e2: None,
            };
            rows.push(Row5d {
                m,
                sigma2: model.variance,
                err_total,
                bound: bound_l2_noisy(&inputs),
                condition_ok: sampling_condition(m, cfg.n, cfg.t, n_sup),
            });
        }
    }
    Ok(rows)
}

pub fn run_experiment_5d(cfg: &Experiment5dConfig) -> Result<Vec<Row5d>> {
    let prep = prepare_5d(cfg)?;
    run_5d_seed(cfg, &prep, cfg.seed)
}

/// Write serializable rows as CSV with a header.
pub fn write_rows_csv<W: Write, R: Serialize>(rows: &[R], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
