//! `wlsq`: weighted least-squares approximation from random samples.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use wlsq_core::bounds::{evaluate, BoundInputs};
use wlsq_core::experiment::{
    default_noise_1d, prepare_5d, run_5d_seed, run_experiment_1d, write_rows_csv, Experiment1dConfig,
    Experiment5dConfig, Preset,
};
use wlsq_core::lsq::{extreme_singular_values, solve_weighted_lsq, SpectrumMethod, DEFAULT_ITERATIONS};
use wlsq_core::sampling::draw_samples;
use wlsq_core::testfn::{TestFunction, B2CUT_RANGE};
use wlsq_core::{
    BasisFamily, DesignOperator, Error, FamilyId, HyperbolicCross, MeasurePair, NoiseModel, OperatorMode,
    OrthonormalSystem, Result, SampleSet, TensorSystem, Truncated1d,
};

#[derive(Parser)]
#[command(name = "wlsq", version, about = "Weighted least-squares approximation from random samples")]
struct Cli {
    /// Worker threads for inner products; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate basis functions on a uniform grid.
    Basis(BasisArgs),
    /// Build a hyperbolic cross index set.
    Cross(CrossArgs),
    /// Draw a sample of the test function.
    Sample(SampleArgs),
    /// Fit a sample read from CSV.
    Fit(FitArgs),
    /// Evaluate error bounds for a JSON object of inputs.
    Bounds(BoundsArgs),
    /// One-dimensional experiment: singular values, split errors and bound per m.
    #[command(name = "experiment-1d")]
    Experiment1d(Exp1dArgs),
    /// Tensor-product experiment with the H2 mixed basis.
    #[command(name = "experiment-5d")]
    Experiment5d(Exp5dArgs),
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long, default_value = "h2")]
    family: FamilyId,
    /// Tabulate only this index.
    #[arg(long)]
    k: Option<usize>,
    /// Tabulate indices `0..m`.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Number of grid points, including both end points.
    #[arg(long, default_value_t = 11)]
    grid: usize,
    #[arg(long)]
    h2_switch: Option<usize>,
}

#[derive(Args)]
struct CrossArgs {
    /// Smoothness of the mixed space, 1 or 2.
    #[arg(long, default_value_t = 2)]
    s: u8,
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Threshold on the product of squared singular values.
    #[arg(long = "R", alias = "r", conflicts_with = "m")]
    threshold: Option<f64>,
    /// Number of indices instead of a threshold.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct NoiseArgs {
    /// Noise variance; Gaussian truncated at `--noise-bound` (default 6σ).
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
    #[arg(long)]
    noise_bound: Option<f64>,
    /// Uniform noise on `[-B, B]` instead of truncated Gaussian.
    #[arg(long)]
    uniform_noise: bool,
}

impl NoiseArgs {
    fn model(&self) -> Result<NoiseModel> {
        let model = if self.uniform_noise {
            let b =
                self.noise_bound.ok_or_else(|| Error::InvalidArgument("uniform noise needs --noise-bound".into()))?;
            NoiseModel::bounded_uniform(b)
        } else if self.noise_var == 0.0 && self.noise_bound.is_none() {
            NoiseModel::none()
        } else {
            match self.noise_bound {
                Some(b) => NoiseModel::truncated_gaussian_with_bound(self.noise_var, b),
                None => NoiseModel::truncated_gaussian(self.noise_var),
            }
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `uniform`, `chebyshev-uniform` or `chebyshev-arcsine`.
    #[arg(long, default_value = "uniform")]
    measure: MeasurePair,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Sample CSV as written by `sample`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "h2")]
    family: FamilyId,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Also estimate the extreme singular values.
    #[arg(long)]
    spectrum: bool,
    /// Recorded in the output.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    /// JSON file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Full,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Full => Preset::Full,
        }
    }
}

#[derive(Args)]
struct Exp1dArgs {
    #[arg(long, default_value = "h2")]
    family: FamilyId,
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    preset: PresetArg,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated list of m values.
    #[arg(long = "m-grid", alias = "m", value_delimiter = ',')]
    m_grid: Option<Vec<usize>>,
    /// Noise variance; default `(0.001 M)²`.
    #[arg(long)]
    noise_var: Option<f64>,
    #[arg(long)]
    noise_bound: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    #[arg(long)]
    measure: Option<MeasurePair>,
    /// Skip the singular value estimates.
    #[arg(long)]
    no_spectrum: bool,
}

#[derive(Args)]
struct Exp5dArgs {
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    preset: PresetArg,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "m-grid", alias = "m", value_delimiter = ',')]
    m_grid: Option<Vec<usize>>,
    /// Comma-separated noise variances; default `0, 0.01 M, 0.03 M`.
    #[arg(long = "noise-var", value_delimiter = ',')]
    noise_var: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6.0)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Recompute rows on every product instead of storing the matrix.
    #[arg(long)]
    matrix_free: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidArgument("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let mut out = open_output(cli.out.as_ref())?;
    match cli.command {
        Command::Basis(a) => cmd_basis(a, cli.format, &mut out)?,
        Command::Cross(a) => cmd_cross(a, cli.format, &mut out)?,
        Command::Sample(a) => cmd_sample(a, cli.format, &mut out)?,
        Command::Fit(a) => cmd_fit(a, cli.format, &mut out)?,
        Command::Bounds(a) => cmd_bounds(a, &mut out)?,
        Command::Experiment1d(a) => cmd_experiment_1d(a, cli.format, &mut out)?,
        Command::Experiment5d(a) => cmd_experiment_5d(a, cli.format, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn family(id: FamilyId, h2_switch: Option<usize>) -> Result<BasisFamily> {
    match h2_switch {
        Some(s) => BasisFamily::with_switch(id, s),
        None => BasisFamily::new(id),
    }
}

fn cmd_basis(a: BasisArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    if a.grid < 2 {
        return Err(Error::InvalidArgument("--grid must be >= 2".into()));
    }
    let fam = family(a.family, a.h2_switch)?;
    let ks: Vec<usize> = match a.k {
        Some(k) => vec![k],
        None => (0..a.m).collect(),
    };
    if ks.is_empty() {
        return Err(Error::InvalidArgument("--m must be >= 1".into()));
    }
    let xs: Vec<f64> = (0..a.grid).map(|i| i as f64 / (a.grid - 1) as f64).collect();
    let table: Vec<Vec<f64>> = xs.iter().map(|&x| ks.iter().map(|&k| fam.eval(k, x)).collect()).collect();
    match format {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(out);
            let mut header = vec!["x".to_string()];
            header.extend(ks.iter().map(|k| format!("eta_{k}")));
            wr.write_record(&header)?;
            for (x, row) in xs.iter().zip(&table) {
                let mut rec = vec![x.to_string()];
                rec.extend(row.iter().map(|v| v.to_string()));
                wr.write_record(&rec)?;
            }
            wr.flush()?;
        }
        Format::Json => {
            let value = json!({ "family": a.family.name(), "k": ks, "x": xs, "values": table });
            write_json(&value, out)?;
        }
    }
    Ok(())
}

fn cmd_cross(a: CrossArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let cross = match (a.threshold, a.m) {
        (Some(r), None) => HyperbolicCross::with_threshold(a.s, a.d, r)?,
        (None, Some(m)) => HyperbolicCross::with_size(a.s, a.d, m)?,
        _ => return Err(Error::InvalidArgument("give exactly one of --R and --m".into())),
    };
    log::info!("{} indices", cross.len());
    match format {
        Format::Csv => cross.write_text(out)?,
        Format::Json => {
            let indices: Vec<&[usize]> = cross.indices().iter().map(|i| i.components()).collect();
            let value = json!({
                "s": a.s,
                "d": a.d,
                "threshold": cross.threshold(),
                "indices": indices,
                "weights": cross.weights(),
            });
            write_json(&value, out)?;
        }
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let f = TestFunction::B2cutTensor(a.d);
    let noise = a.noise.model()?;
    let samples = draw_samples(a.measure, a.n, a.d, a.seed)?.with_values(|x| f.eval(x)).add_noise(&noise, a.seed)?;
    match format {
        Format::Csv => samples.write_csv(out)?,
        Format::Json => {
            let value = json!({
                "dim": samples.dim(),
                "seed": a.seed,
                "points": samples.points(),
                "weights": samples.weights(),
                "y": samples.y(),
                "epsilon": samples.noise(),
            });
            write_json(&value, out)?;
        }
    }
    Ok(())
}

fn fit_system(id: FamilyId, samples: &SampleSet, m: usize) -> Result<Arc<dyn OrthonormalSystem>> {
    let fam = BasisFamily::new(id)?;
    if samples.dim() == 1 {
        return Ok(Arc::new(Truncated1d::new(fam, m)));
    }
    let s = fam
        .smoothness()
        .ok_or_else(|| Error::InvalidArgument(format!("{id} has no tensor cross; use h1 or h2 for d > 1")))?;
    let cross = Arc::new(HyperbolicCross::with_size(s, samples.dim(), m)?);
    Ok(Arc::new(TensorSystem::new(fam, cross)?))
}

fn cmd_fit(a: FitArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    if a.m == 0 {
        return Err(Error::InvalidArgument("--m must be >= 1".into()));
    }
    let samples = SampleSet::read_csv(BufReader::new(File::open(&a.input)?))?;
    let system = fit_system(a.family, &samples, a.m)?;
    let op = DesignOperator::new(system, &samples, OperatorMode::Auto)?;
    let mut fit = solve_weighted_lsq(&op, &samples.y(), a.iterations)?.with_seed(a.seed.or(samples.seed()));
    if a.spectrum {
        fit = fit.with_spectrum(&extreme_singular_values(&op, SpectrumMethod::Auto)?);
    }
    match format {
        Format::Json => {
            fit.write_json(&mut *out)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(out);
            wr.write_record(["k", "coefficient"])?;
            for (k, c) in fit.coefficients.iter().enumerate() {
                wr.write_record([k.to_string(), c.to_string()])?;
            }
            wr.flush()?;
        }
    }
    Ok(())
}

fn cmd_bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    match &a.input {
        Some(p) => File::open(p)?.read_to_string(&mut text)?,
        None => io::stdin().read_to_string(&mut text)?,
    };
    let inputs: BoundInputs = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("bound inputs: {e}")))?;
    write_json(&evaluate(&inputs)?, out)
}

fn cmd_experiment_1d(a: Exp1dArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let mut cfg = Experiment1dConfig::new(a.family, a.preset.into());
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(grid) = a.m_grid {
        cfg.m_grid = grid;
    }
    cfg.noise = match (a.noise_var, a.noise_bound) {
        (None, None) => default_noise_1d(),
        (Some(v), None) if v == 0.0 => NoiseModel::none(),
        (Some(v), None) => NoiseModel::truncated_gaussian(v),
        (v, Some(b)) => NoiseModel::truncated_gaussian_with_bound(v.unwrap_or(0.0), b),
    };
    cfg.seed = a.seed;
    cfg.t = a.t;
    cfg.iterations = a.iterations;
    if let Some(m) = a.measure {
        cfg.measure = m;
    }
    cfg.spectrum = !a.no_spectrum;
    let rows = run_experiment_1d(&cfg)?;
    match format {
        Format::Csv => write_rows_csv(&rows, out),
        Format::Json => write_json(&rows, out),
    }
}

fn cmd_experiment_5d(a: Exp5dArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let mut cfg = Experiment5dConfig::new(a.preset.into());
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(grid) = a.m_grid {
        cfg.m_grid = grid;
    }
    if let Some(v) = a.noise_var {
        cfg.variances = v;
    }
    cfg.seed = a.seed;
    cfg.t = a.t;
    cfg.iterations = a.iterations;
    if a.matrix_free {
        cfg.mode = OperatorMode::MatrixFree;
    }
    log::info!("noise scale M = {B2CUT_RANGE}");
    let prep = prepare_5d(&cfg)?;
    let rows = run_5d_seed(&cfg, &prep, cfg.seed)?;
    match format {
        Format::Csv => write_rows_csv(&rows, out),
        Format::Json => write_json(&rows, out),
    }
}
