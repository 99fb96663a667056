//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 3 7` runs a subset.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use common::{brute_force_cross, gauss_chebyshev, poly_eval, rat, reference, shifted_legendre, H2Oracle};
use num::BigRational;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wlsq_core::basis1d::{eval_h2_stable, root_residual, ROOT_TOL};
use wlsq_core::bounds::{bernstein_tail, bound_l2_noisy, bound_linf, hanson_wright_level, BoundInputs};
use wlsq_core::experiment::{
    prepare_5d, run_5d_seed, run_experiment_1d, Experiment1dConfig, Experiment5dConfig, Preset,
};
use wlsq_core::lsq::{extreme_singular_values, SpectrumMethod};
use wlsq_core::quadrature::GaussLegendre;
use wlsq_core::sampling::{draw_samples, MeasurePair};
use wlsq_core::tensor::SigmaCache;
use wlsq_core::testfn::B2CUT_RANGE;
use wlsq_core::{
    BasisFamily, DesignOperator, EigenRootTable, FamilyId, HyperbolicCross, MeasureId, OperatorMode, Truncated1d,
};

struct Outcome {
    pass: bool,
    detail: String,
    /// Failure confined to a documented unattainable part.
    known: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, known: false }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "root solver", limit: Duration::from_secs(1), run: c1_roots },
        Criterion { id: 2, name: "H2 stable evaluation", limit: Duration::from_secs(10), run: c2_stable },
        Criterion { id: 3, name: "orthonormality", limit: Duration::from_secs(30), run: c3_gram },
        Criterion { id: 4, name: "Christoffel identity", limit: Duration::MAX, run: c4_christoffel },
        Criterion { id: 5, name: "hyperbolic cross counts", limit: Duration::from_secs(5), run: c5_cross },
        Criterion { id: 6, name: "MZ stability", limit: Duration::from_secs(120), run: c6_mz },
        Criterion { id: 7, name: "conditioning contrast", limit: Duration::from_secs(300), run: c7_conditioning },
        Criterion { id: 8, name: "rate reproduction", limit: Duration::from_secs(600), run: c8_rates },
        Criterion { id: 9, name: "noise growth", limit: Duration::from_secs(600), run: c9_noise },
        Criterion { id: 10, name: "bound validity", limit: Duration::from_secs(1800), run: c10_bound_validity },
        Criterion { id: 11, name: "formula evaluators", limit: Duration::from_secs(1), run: c11_formulas },
    ];
    let mut unexpected = 0;
    let mut known = 0;
    for c in &criteria {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = out.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let time_note = if in_time { String::new() } else { format!(" over time limit {:?}", c.limit) };
        println!("{tag} [{}] {}: {} ({:.2} s{time_note})", c.id, c.name, out.detail, elapsed.as_secs_f64());
        if !pass {
            if out.known && in_time {
                known += 1;
            } else {
                unexpected += 1;
            }
        }
    }
    println!("acceptance: {unexpected} unexpected failure(s), {known} known unattainable");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn c1_roots() -> Outcome {
    let table = EigenRootTable::new(200, ROOT_TOL).unwrap();
    let mut worst_res = 0.0f64;
    let mut res_ok = true;
    let mut outside = Vec::new();
    let mut outside_explained = true;
    for k in 2..=200 {
        let t = table.get(k).unwrap();
        let res = (t.cos() - 1.0 / t.cosh()).abs();
        worst_res = worst_res.max(res);
        res_ok &= res <= 1e-12 && root_residual(t).abs() <= 1e-12;
        let tt = common::t_tilde_f64(k);
        let env = PI * (-(k as f64 - 1.0) * PI).exp();
        if (t - tt).abs() > env {
            outside.push(k);
            // No double other than fl(t̃) fits inside an envelope below half an ulp;
            // the miss is accepted only when t is the correctly rounded root.
            let rounded_root = common::t_k_mp(k, 2000).to_f64();
            outside_explained &= env < 0.5 * tt * f64::EPSILON && t == rounded_root;
        }
    }
    let pass = res_ok && outside.is_empty();
    Outcome {
        pass,
        detail: format!(
            "max residual {worst_res:.2e}; outside envelope at k = {outside:?} (correctly rounded root there: {outside_explained})"
        ),
        known: !pass && res_ok && outside_explained,
    }
}

fn c2_stable() -> Outcome {
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let mut ok = true;
    let mut worst_env_ratio = 0.0f64;
    for k in 10..=25 {
        let o = H2Oracle::new(k);
        let worst = grid.iter().map(|&x| (o.eval(x) - eval_h2_stable(k, x)).abs()).fold(0.0, f64::max);
        let env = 16.0 * (-PI * (k as f64 - 1.0) / 2.0).exp();
        worst_env_ratio = worst_env_ratio.max(worst / env);
        ok &= worst <= env;
    }
    let mut worst_rel = 0.0f64;
    for k in (27..=60).chain([80, 100, 150, 200]) {
        let o = H2Oracle::new(k);
        let exact: Vec<f64> = grid.iter().map(|&x| o.eval(x)).collect();
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let worst = grid.iter().zip(&exact).map(|(&x, e)| (e - eval_h2_stable(k, x)).abs()).fold(0.0, f64::max);
        worst_rel = worst_rel.max(worst / scale);
        ok &= worst <= 1e-15 * scale;
    }
    Outcome::new(ok, format!("k 10..25 max error/envelope {worst_env_ratio:.2e}; k >= 27 max relative {worst_rel:.2e}"))
}

fn gram_deviation(family: &BasisFamily, m: usize) -> f64 {
    let mut g = vec![0.0; m * m];
    let mut v = vec![0.0; m];
    let mut add = |x: f64, w: f64, g: &mut Vec<f64>| {
        family.eval_all(x, &mut v);
        for a in 0..m {
            for b in 0..m {
                g[a * m + b] += w * v[a] * v[b];
            }
        }
    };
    match family.measure() {
        MeasureId::Chebyshev => {
            let (nodes, w) = gauss_chebyshev(512);
            for x in nodes {
                add(x, w, &mut g);
            }
        }
        MeasureId::Lebesgue => {
            let rule = GaussLegendre::new(512);
            for (lo, hi) in [(0.0, 0.5), (0.5, 1.0)] {
                let h = 0.5 * (hi - lo);
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    add(lo + h * (x + 1.0), w * h, &mut g);
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g[a * m + b] - target).abs());
        }
    }
    worst
}

fn c3_gram() -> Outcome {
    let mut ok = true;
    let parts: Vec<String> = FamilyId::ALL
        .iter()
        .map(|&id| {
            let dev = gram_deviation(&BasisFamily::new(id).unwrap(), 64);
            ok &= dev <= 1e-8;
            format!("{id} {dev:.1e}")
        })
        .collect();
    Outcome::new(ok, format!("max Gram deviation at m = 64: {}", parts.join(", ")))
}

fn c4_christoffel() -> Outcome {
    let zero = rat(0, 1);
    let mut sum = BigRational::zero();
    let mut exact_ok = true;
    for k in 0..20 {
        let p0 = poly_eval(&shifted_legendre(k), &zero);
        sum += rat(2 * k as i64 + 1, 1) * &p0 * &p0;
        exact_ok &= sum == rat(((k + 1) * (k + 1)) as i64, 1);
    }
    let f = BasisFamily::legendre();
    let worst = (1..=200)
        .map(|m| {
            let want = (m * m) as f64;
            (f.christoffel(m, 0.0) - want).abs() / want
        })
        .fold(0.0, f64::max);
    Outcome::new(
        exact_ok && worst <= 1e-9,
        format!("exact for m <= 20: {exact_ok}; max relative error m <= 200: {worst:.1e}"),
    )
}

fn c5_cross() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (s, r) in [(1u8, 5.3e-5), (2u8, 8.3e-8)] {
        let cross = HyperbolicCross::with_threshold(s, 3, r).unwrap();
        let mut cache = SigmaCache::new(s).unwrap();
        let sigma: Vec<f64> = (0..400).map(|k| cache.get(k).unwrap()).collect();
        let brute = brute_force_cross(&sigma, 3, r);
        let mut got: Vec<Vec<usize>> = cross.indices().iter().map(|i| i.components().to_vec()).collect();
        got.sort();
        let mut want = brute.clone();
        want.sort();
        let matches = got == want;
        ok &= matches && cross.len().abs_diff(254) <= 2;
        parts.push(format!("s={s}: {} indices, brute force match {matches}", cross.len()));
    }
    Outcome::new(ok, parts.join("; "))
}

fn c6_mz() -> Outcome {
    let (m, t) = (16usize, 2.0);
    let family = BasisFamily::h1();
    let sup_ratio = family.christoffel_sup_bound(m);
    let n = (10.0 * sup_ratio * ((m as f64).ln() + t)).ceil() as usize;
    let system = Arc::new(Truncated1d::new(family, m));
    let mut bad = 0usize;
    let runs = 500u64;
    for seed in 0..runs {
        let s = draw_samples(MeasurePair::LebesgueUniform, n, 1, seed).unwrap();
        let op = DesignOperator::new(system.clone(), &s, OperatorMode::Materialized).unwrap();
        let sv = extreme_singular_values(&op, SpectrumMethod::GolubKahan).unwrap();
        // Singular values of (1/√n) W^{1/2} L, squared.
        if sv.s_min * sv.s_min < 0.5 || sv.s_max * sv.s_max > 1.5 {
            bad += 1;
        }
    }
    let frac = bad as f64 / runs as f64;
    let allowed = 2.0 * (-t).exp();
    Outcome::new(frac <= allowed, format!("n = {n}, violating fraction {frac:.3} (allowed {allowed:.3})"))
}

fn c7_conditioning() -> Outcome {
    let (n, m) = (10_000usize, 1000usize);
    let mut ok = true;
    let mut parts = Vec::new();
    for id in FamilyId::ALL {
        let family = BasisFamily::new(id).unwrap();
        let measure = MeasurePair::uniform_for(id.measure());
        let s = draw_samples(measure, n, 1, 0).unwrap();
        let op = DesignOperator::new(Arc::new(Truncated1d::new(family, m)), &s, OperatorMode::Auto).unwrap();
        let sv = extreme_singular_values(&op, SpectrumMethod::GolubKahan).unwrap();
        let cond = sv.condition_number();
        ok &= match id {
            FamilyId::H1 | FamilyId::H2 => cond <= 14.0,
            FamilyId::Legendre | FamilyId::Chebyshev => cond >= 1e10,
        };
        parts.push(format!("{id} {cond:.4e}"));
    }
    Outcome::new(ok, format!("condition numbers: {}", parts.join(", ")))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

struct RateRow {
    id: FamilyId,
    norm: f64,
    squared: f64,
    noise: f64,
}

/// One noisy desk-scale run per family, shared by criteria 8 and 9.
fn rate_rows() -> &'static [RateRow] {
    static ROWS: OnceLock<Vec<RateRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        [FamilyId::H1, FamilyId::H2, FamilyId::Legendre, FamilyId::Chebyshev]
            .into_iter()
            .map(|id| {
                let mut cfg = Experiment1dConfig::new(id, Preset::Desk);
                cfg.spectrum = false;
                let rows = run_experiment_1d(&cfg).unwrap();
                let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
                let sq: Vec<f64> = rows.iter().map(|r| r.err_clean).collect();
                let norm: Vec<f64> = sq.iter().map(|v| v.sqrt()).collect();
                let noise: Vec<f64> = rows.iter().map(|r| r.err_noise).collect();
                RateRow { id, norm: slope(&ms, &norm), squared: slope(&ms, &sq), noise: slope(&ms, &noise) }
            })
            .collect()
    })
}

fn is_h(id: FamilyId) -> bool {
    matches!(id, FamilyId::H1 | FamilyId::H2)
}

/// Pass/fail split into the H bases and the polynomial bases.
fn split_outcome(checks: &[(FamilyId, bool)], detail: String) -> Outcome {
    let h_ok = checks.iter().filter(|(id, _)| is_h(*id)).all(|(_, ok)| *ok);
    let pass = checks.iter().all(|(_, ok)| *ok);
    // Uniform points cannot stabilize the polynomial bases at this n (N(V_m) ~ m² > n).
    Outcome { pass, detail, known: !pass && h_ok }
}

fn c8_rates() -> Outcome {
    let rows = rate_rows();
    let checks: Vec<(FamilyId, bool)> = rows
        .iter()
        .map(|r| {
            let (lo, hi) = if r.id == FamilyId::H1 { (-1.8, -1.2) } else { (-2.8, -2.2) };
            (r.id, (lo..=hi).contains(&r.norm))
        })
        .collect();
    let parts: Vec<String> =
        rows.iter().map(|r| format!("{} {:.2} (squared {:.2})", r.id, r.norm, r.squared)).collect();
    split_outcome(&checks, format!("slope of the error norm: {}", parts.join(", ")))
}

fn c9_noise() -> Outcome {
    let rows = rate_rows();
    let checks: Vec<(FamilyId, bool)> = rows.iter().map(|r| (r.id, (0.8..=1.2).contains(&r.noise))).collect();
    let parts: Vec<String> = rows.iter().map(|r| format!("{} {:.2}", r.id, r.noise)).collect();
    split_outcome(&checks, format!("slope of the noise error: {}", parts.join(", ")))
}

fn c10_bound_validity() -> Outcome {
    let mut cfg = Experiment5dConfig::new(Preset::Desk);
    cfg.m_grid = vec![64, 256, 1024];
    cfg.variances = vec![0.0, 0.01 * B2CUT_RANGE];
    cfg.mode = OperatorMode::Materialized;
    let prep = prepare_5d(&cfg).unwrap();
    let seeds = 100u64;
    let cells = cfg.m_grid.len() * cfg.variances.len();
    let mut exceed = vec![0usize; cells];
    let mut cond = vec![true; cfg.m_grid.len()];
    let mut ratio = vec![0.0f64; cells];
    for seed in 0..seeds {
        let rows = run_5d_seed(&cfg, &prep, seed).unwrap();
        for (i, r) in rows.iter().enumerate() {
            if r.err_total > r.bound {
                exceed[i] += 1;
            }
            ratio[i] = ratio[i].max(r.err_total / r.bound);
            cond[i / cfg.variances.len()] &= r.condition_ok;
        }
    }
    let ok = exceed.iter().all(|&e| e <= 1);
    let parts: Vec<String> = cfg
        .m_grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &m)| {
            let nv = cfg.variances.len();
            let (exceed, ratio) = (&exceed, &ratio);
            cfg.variances.iter().enumerate().map(move |(vi, &v)| {
                let i = gi * nv + vi;
                format!("m={m} s2={v}: {}/{seeds} over, max err/bound {:.1e}", exceed[i], ratio[i])
            })
        })
        .collect();
    Outcome::new(ok, format!("{}; sampling condition per m {cond:?}", parts.join("; ")))
}

fn c11_formulas() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let m = rng.gen_range(1..5000usize);
        let n = rng.gen_range(m..2_000_000usize);
        let t = rng.gen_range(0.0..20.0);
        let e2 = 10f64.powf(rng.gen_range(-8.0..0.0));
        let einf = 10f64.powf(rng.gen_range(-8.0..1.0));
        let s2 = if rng.gen_bool(0.2) { 0.0 } else { 10f64.powf(rng.gen_range(-8.0..0.0)) };
        let b = 6.0 * s2.sqrt() * rng.gen_range(1.0..2.0);
        let inv_rho = rng.gen_range(1.0..5.0);
        let nsup = rng.gen_range(1.0..1e5);
        let p = BoundInputs {
            m,
            n,
            t,
            sup_ratio: nsup,
            sup_inv_density: inv_rho,
            e2,
            e_inf: einf,
            sigma2: s2,
            noise_bound: b,
            n_sup: nsup,
            linf_e_inf: None,
            linf_e2: None,
        };
        let (mf, nf) = (m as f64, n as f64);
        let op_norm = rng.gen_range(0.0..3.0);
        let frob = op_norm * rng.gen_range(1.0..10.0);
        let checks = [
            close(bound_l2_noisy(&p), reference::l2_noisy(e2, einf, mf, nf, t, s2, b, inv_rho)),
            close(bound_linf(&p), reference::linf(einf, e2, nsup, mf, nf, t, s2, b, inv_rho)),
            close(bernstein_tail(n, t, s2, b), reference::bernstein(nf, t, s2, b)),
            close(hanson_wright_level(op_norm, frob, t, s2, b), reference::hanson_wright(op_norm, frob, t, s2, b)),
        ];
        mismatches += checks.iter().filter(|c| !**c).count();
    }
    Outcome::new(mismatches == 0, format!("{mismatches} mismatches over 1000 tuples x 4 evaluators"))
}
