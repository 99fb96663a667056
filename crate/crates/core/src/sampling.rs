//! Random sample points, importance weights and noise.
//!
//! Every random quantity is a pure function of `(seed, stream, index)`:
//! points use stream 0 and noise uses stream 1 of a ChaCha8 generator, with
//! sample `i` starting at word position `i << 16`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis1d::MeasureId;
use crate::error::{invalid, Error, Result};

const POINT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

fn rng_at(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos((index as u128) << 16);
    rng
}

/// Error measure `μ` together with the sampling density `ρ = dν/dμ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurePair {
    /// Uniform points, Lebesgue error measure, `ρ ≡ 1`.
    LebesgueUniform,
    /// Uniform points, Chebyshev error measure, `ρ(x) = √(1-(2x-1)²)`.
    ChebyshevUniform,
    /// Arcsine-distributed points, Chebyshev error measure, `ρ ≡ 2/π`.
    ChebyshevArcsine,
}

impl MeasurePair {
    pub fn error_measure(self) -> MeasureId {
        match self {
            MeasurePair::LebesgueUniform => MeasureId::Lebesgue,
            _ => MeasureId::Chebyshev,
        }
    }

    /// Natural choice with uniform points for a given error measure.
    pub fn uniform_for(measure: MeasureId) -> Self {
        match measure {
            MeasureId::Lebesgue => MeasurePair::LebesgueUniform,
            MeasureId::Chebyshev => MeasurePair::ChebyshevUniform,
        }
    }

    /// `ρ` at a scalar coordinate.
    pub fn density_1d(self, x: f64) -> f64 {
        match self {
            MeasurePair::LebesgueUniform => 1.0,
            MeasurePair::ChebyshevUniform => 2.0 * (x * (1.0 - x)).max(0.0).sqrt(),
            MeasurePair::ChebyshevArcsine => std::f64::consts::FRAC_2_PI,
        }
    }

    /// `ρ(x) = Π_j ρ(x_j)`.
    pub fn density(self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.density_1d(v)).product()
    }

    /// `‖1/ρ‖∞` in dimension `d`.
    pub fn sup_inv_density(self, d: usize) -> f64 {
        match self {
            MeasurePair::LebesgueUniform => 1.0,
            MeasurePair::ChebyshevUniform => f64::INFINITY,
            MeasurePair::ChebyshevArcsine => std::f64::consts::FRAC_PI_2.powi(d as i32),
        }
    }

    /// Map a uniform variate to a point of `ν` in one coordinate.
    pub fn transform(self, u: f64) -> f64 {
        match self {
            MeasurePair::ChebyshevArcsine => 0.5 * (1.0 - (std::f64::consts::PI * u).cos()),
            _ => u,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasurePair::LebesgueUniform => "uniform",
            MeasurePair::ChebyshevUniform => "chebyshev-uniform",
            MeasurePair::ChebyshevArcsine => "chebyshev-arcsine",
        }
    }
}

impl fmt::Display for MeasurePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasurePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "lebesgue" => Ok(MeasurePair::LebesgueUniform),
            "chebyshev-uniform" => Ok(MeasurePair::ChebyshevUniform),
            "chebyshev-arcsine" | "arcsine" => Ok(MeasurePair::ChebyshevArcsine),
            other => Err(Error::Parse(format!("unknown measure pair '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    TruncatedGaussian,
    BoundedUniform,
}

/// Additive noise with `E ε² <= σ²` and `|ε| <= B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub variance: f64,
    pub bound: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { kind: NoiseKind::None, variance: 0.0, bound: 0.0 }
    }

    /// Gaussian of variance `σ²`, truncated at `B = 6σ`.
    pub fn truncated_gaussian(variance: f64) -> Self {
        Self::truncated_gaussian_with_bound(variance, 6.0 * variance.sqrt())
    }

    pub fn truncated_gaussian_with_bound(variance: f64, bound: f64) -> Self {
        Self { kind: NoiseKind::TruncatedGaussian, variance, bound }
    }

    /// Uniform on `[-B, B]`, variance `B²/3`.
    pub fn bounded_uniform(bound: f64) -> Self {
        Self { kind: NoiseKind::BoundedUniform, variance: bound * bound / 3.0, bound }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(invalid(format!("noise variance must be finite and >= 0, got {}", self.variance)));
        }
        if !(self.bound >= 0.0 && self.bound.is_finite()) {
            return Err(invalid(format!("noise bound must be finite and >= 0, got {}", self.bound)));
        }
        if self.kind == NoiseKind::TruncatedGaussian && self.variance > 0.0 && self.bound == 0.0 {
            return Err(invalid("truncated Gaussian noise needs a positive bound"));
        }
        Ok(())
    }

    /// Draw `ε_i`.
    pub fn sample(&self, seed: u64, index: usize) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::TruncatedGaussian => {
                if self.variance == 0.0 {
                    return 0.0;
                }
                let normal = Normal::new(0.0, self.variance.sqrt()).expect("finite sigma");
                let mut rng = rng_at(seed, NOISE_STREAM, index);
                loop {
                    let e: f64 = normal.sample(&mut rng);
                    if e.abs() <= self.bound {
                        return e;
                    }
                }
            }
            NoiseKind::BoundedUniform => {
                let mut rng = rng_at(seed, NOISE_STREAM, index);
                self.bound * (2.0 * rng.gen::<f64>() - 1.0)
            }
        }
    }
}

/// Points, weights, clean values and noise of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    clean: Vec<f64>,
    noise: Vec<f64>,
    seed: Option<u64>,
}

/// Draw `n` i.i.d. points of `ν` in `[0,1]^d` with weights `1/ρ(x_i)`.
pub fn draw_samples(measure: MeasurePair, n: usize, d: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(invalid("sample size must be >= 1"));
    }
    if d == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    let mut points = vec![0.0; n * d];
    points.par_chunks_mut(d).enumerate().for_each(|(i, p)| {
        let mut rng = rng_at(seed, POINT_STREAM, i);
        for v in p.iter_mut() {
            *v = measure.transform(rng.gen::<f64>());
        }
    });
    let weights = points
        .chunks(d)
        .map(|p| {
            let rho = measure.density(p);
            if rho > 0.0 && rho.is_finite() {
                Ok(1.0 / rho)
            } else {
                Err(Error::ZeroDensity { point: p.to_vec() })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet { dim: d, points, weights, clean: vec![0.0; n], noise: vec![0.0; n], seed: Some(seed) })
}

impl SampleSet {
    /// Assemble from raw parts; weights must be positive and finite.
    pub fn from_parts(
        dim: usize,
        points: Vec<f64>,
        weights: Vec<f64>,
        clean: Vec<f64>,
        noise: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let n = weights.len();
        if points.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: points.len() });
        }
        for v in [&clean, &noise] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("weight {i} is not positive and finite")));
        }
        Ok(Self { dim, points, weights, clean, noise, seed: None })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major `n × d` coordinates.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn clean_values(&self) -> &[f64] {
        &self.clean
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// `y = f(x_i) + ε_i`.
    pub fn y(&self) -> Vec<f64> {
        self.clean.iter().zip(&self.noise).map(|(a, b)| a + b).collect()
    }

    /// Evaluate `f` at every point as the clean values.
    pub fn with_values<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let d = self.dim;
        let points = &self.points;
        self.clean.par_iter_mut().enumerate().for_each(|(i, c)| *c = f(&points[i * d..(i + 1) * d]));
        self
    }

    /// Replace the noise with fresh draws from `model`.
    pub fn add_noise(mut self, model: &NoiseModel, seed: u64) -> Result<Self> {
        model.validate()?;
        self.noise.par_iter_mut().enumerate().for_each(|(i, e)| *e = model.sample(seed, i));
        Ok(self)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x_{j}")).collect();
        header.extend(["weight", "y", "epsilon"].map(String::from));
        wr.write_record(&header)?;
        let y = self.y();
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.point(i).iter().map(|v| format_f64(*v)).collect();
            rec.push(format_f64(self.weights[i]));
            rec.push(format_f64(y[i]));
            rec.push(format_f64(self.noise[i]));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let cols = header.len();
        if cols < 4 {
            return Err(Error::Parse(format!("sample CSV needs at least 4 columns, found {cols}")));
        }
        let dim = cols - 3;
        for (j, name) in header.iter().enumerate() {
            let want = match j {
                _ if j < dim => format!("x_{}", j + 1),
                _ if j == dim => "weight".into(),
                _ if j == dim + 1 => "y".into(),
                _ => "epsilon".into(),
            };
            if name.trim() != want {
                return Err(Error::Parse(format!("column {} should be '{want}', found '{name}'", j + 1)));
            }
        }
        let (mut points, mut weights, mut clean, mut noise) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 2)))?;
            points.extend_from_slice(&vals[..dim]);
            weights.push(vals[dim]);
            noise.push(vals[dim + 2]);
            clean.push(vals[dim + 1] - vals[dim + 2]);
        }
        if weights.is_empty() {
            return Err(Error::Parse("sample CSV has no rows".into()));
        }
        Self::from_parts(dim, points, weights, clean, noise)
    }
}

/// Shortest representation that parses back to the same double.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}
