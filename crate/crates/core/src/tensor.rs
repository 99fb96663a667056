//! Hyperbolic-cross index sets and tensor-product systems on `[0,1]^d`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::basis1d::{singular_value_sq, BasisFamily, MeasureId};
use crate::error::{invalid, Error, Result};
use crate::system::OrthonormalSystem;

/// Default limit on the number of indices a cross may contain.
pub const DEFAULT_CROSS_CAP: usize = 5_000_000;

/// A multi-index `(k_1, …, k_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    /// Componentwise `self <= other`.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Per-coordinate `σ_k²`, extended on demand.
#[derive(Debug, Clone)]
pub struct SigmaCache {
    s: u8,
    values: Vec<f64>,
}

impl SigmaCache {
    pub fn new(s: u8) -> Result<Self> {
        if !(s == 1 || s == 2) {
            return Err(invalid(format!("smoothness must be 1 or 2, got {s}")));
        }
        Ok(Self { s, values: Vec::new() })
    }

    pub fn get(&mut self, k: usize) -> Result<f64> {
        while self.values.len() <= k {
            let next = singular_value_sq(self.s, self.values.len())?;
            self.values.push(next);
        }
        Ok(self.values[k])
    }

    /// Product `Π σ_{k_j}²`, multiplied in coordinate order.
    pub fn product(&mut self, idx: &[usize]) -> Result<f64> {
        let mut p = 1.0;
        for &k in idx {
            p *= self.get(k)?;
        }
        Ok(p)
    }
}

/// How a cross is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossTarget {
    /// All indices with `Π σ² >= R`.
    Threshold(f64),
    /// The `m` indices with the largest products.
    Size(usize),
}

/// Heap entry ordered by weight (max first), then lexicographically smallest.
struct Entry {
    weight: f64,
    idx: Vec<usize>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight.total_cmp(&other.weight).then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Multi-indices `k` with `Π_j σ_{k_j}² >= R`, in canonical order:
/// descending product, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicCross {
    smoothness: u8,
    dim: usize,
    threshold: f64,
    indices: Vec<MultiIndex>,
    weights: Vec<f64>,
}

impl HyperbolicCross {
    pub fn build(s: u8, d: usize, target: CrossTarget) -> Result<Self> {
        Self::build_capped(s, d, target, DEFAULT_CROSS_CAP)
    }

    pub fn with_threshold(s: u8, d: usize, r: f64) -> Result<Self> {
        Self::build(s, d, CrossTarget::Threshold(r))
    }

    pub fn with_size(s: u8, d: usize, m: usize) -> Result<Self> {
        Self::build(s, d, CrossTarget::Size(m))
    }

    /// Build with an explicit limit on the number of indices.
    pub fn build_capped(s: u8, d: usize, target: CrossTarget, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        match target {
            CrossTarget::Threshold(r) if !(r > 0.0 && r <= 1.0) => {
                return Err(invalid(format!("threshold must lie in (0, 1], got {r}")));
            }
            CrossTarget::Size(0) => return Err(invalid("cross size must be >= 1")),
            CrossTarget::Size(m) if m > cap => {
                return Err(Error::Resource(format!("cross size {m} exceeds cap {cap}")));
            }
            _ => {}
        }
        let mut sigma = SigmaCache::new(s)?;
        let mut heap = BinaryHeap::new();
        let mut seen = HashSet::new();
        let origin = vec![0usize; d];
        seen.insert(origin.clone());
        heap.push(Entry { weight: 1.0, idx: origin });

        let mut indices = Vec::new();
        let mut weights = Vec::new();
        while let Some(top) = heap.peek() {
            let done = match target {
                CrossTarget::Threshold(r) => top.weight < r,
                CrossTarget::Size(m) => indices.len() >= m,
            };
            if done {
                break;
            }
            if indices.len() >= cap {
                return Err(Error::Resource(format!("cross exceeds cap of {cap} indices")));
            }
            let Entry { weight, idx } = heap.pop().expect("peeked");
            for j in 0..d {
                let mut next = idx.clone();
                next[j] += 1;
                if seen.insert(next.clone()) {
                    let w = sigma.product(&next)?;
                    heap.push(Entry { weight: w, idx: next });
                }
            }
            indices.push(MultiIndex(idx));
            weights.push(weight);
        }
        let threshold = match target {
            CrossTarget::Threshold(r) => r,
            CrossTarget::Size(_) => *weights.last().expect("size >= 1"),
        };
        Ok(Self { smoothness: s, dim: d, threshold, indices, weights })
    }

    pub fn smoothness(&self) -> u8 {
        self.smoothness
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R`; in size mode this is the smallest product in the set.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Products `Π σ²` aligned with [`indices`](Self::indices).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        self.indices.contains(idx)
    }

    /// Largest component in each coordinate.
    pub fn max_per_coordinate(&self) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for idx in &self.indices {
            for (o, &k) in out.iter_mut().zip(&idx.0) {
                *o = (*o).max(k);
            }
        }
        out
    }

    /// The first `m` indices, which form the size-`m` cross.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.min(self.len());
        Self {
            smoothness: self.smoothness,
            dim: self.dim,
            threshold: if m > 0 { self.weights[m - 1] } else { self.threshold },
            indices: self.indices[..m].to_vec(),
            weights: self.weights[..m].to_vec(),
        }
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# s={} d={} R={:e}", self.smoothness, self.dim, self.threshold)?;
        for idx in &self.indices {
            writeln!(w, "{idx}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parse the text format; weights are recomputed and canonical order restored.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty cross file".into()))??;
        let (s, d, threshold) = parse_header(&header)?;
        let mut sigma = SigmaCache::new(s)?;
        let mut entries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let idx = line
                .split_whitespace()
                .map(|tok| tok.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if idx.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: idx.len() });
            }
            let w = sigma.product(&idx)?;
            entries.push(Entry { weight: w, idx });
        }
        entries.sort_by(|a, b| b.cmp(a));
        let weights = entries.iter().map(|e| e.weight).collect();
        let indices = entries.into_iter().map(|e| MultiIndex(e.idx)).collect();
        Ok(Self { smoothness: s, dim: d, threshold, indices, weights })
    }
}

fn parse_header(h: &str) -> Result<(u8, usize, f64)> {
    let body = h.strip_prefix('#').ok_or_else(|| Error::Parse(format!("missing header line, got '{h}'")))?;
    let (mut s, mut d, mut r) = (None, None, None);
    for tok in body.split_whitespace() {
        let (key, val) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("malformed header token '{tok}'")))?;
        let bad = |_| Error::Parse(format!("bad value in header token '{tok}'"));
        match key {
            "s" => s = Some(val.parse::<u8>().map_err(|e| bad(e.to_string()))?),
            "d" => d = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "R" => r = Some(val.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(Error::Parse(format!("unknown header key '{key}'"))),
        }
    }
    match (s, d, r) {
        (Some(s), Some(d), Some(r)) => Ok((s, d, r)),
        _ => Err(Error::Parse("header needs s, d and R".into())),
    }
}

/// Tensor-product system `η_k(x) = Π_j η_{k_j}(x_j)` over a cross.
#[derive(Debug, Clone)]
pub struct TensorSystem {
    family: BasisFamily,
    cross: Arc<HyperbolicCross>,
    m: usize,
    per_coord: usize,
}

impl TensorSystem {
    pub fn new(family: BasisFamily, cross: Arc<HyperbolicCross>) -> Result<Self> {
        if family.smoothness() != Some(cross.smoothness()) {
            return Err(invalid(format!(
                "family {} does not match a cross of smoothness {}",
                family.id(),
                cross.smoothness()
            )));
        }
        let per_coord = cross.max_per_coordinate().into_iter().max().unwrap_or(0) + 1;
        let m = cross.len();
        Ok(Self { family, cross, m, per_coord })
    }

    /// Restrict to the first `m` indices of the cross.
    pub fn truncated(&self, m: usize) -> Self {
        Self { m: m.min(self.cross.len()), ..self.clone() }
    }

    pub fn cross(&self) -> &HyperbolicCross {
        &self.cross
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    /// Checked evaluation returning a fresh vector.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cross.dim() {
            return Err(Error::DimensionMismatch { expected: self.cross.dim(), got: x.len() });
        }
        let mut out = vec![0.0; self.m];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// `N(V_m, x)` for the tensor system.
    pub fn christoffel(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.iter().map(|v| v * v).sum())
    }

    /// `Σ_k Π_j ‖η_{k_j}‖∞²`, an upper bound on `sup_x N(V_m, x)`.
    pub fn christoffel_sup_bound(&self) -> f64 {
        self.cross.indices()[..self.m]
            .iter()
            .map(|idx| idx.0.iter().map(|&k| self.family.sup_norm_bound(k).powi(2)).product::<f64>())
            .sum()
    }
}

impl OrthonormalSystem for TensorSystem {
    fn input_dim(&self) -> usize {
        self.cross.dim()
    }

    fn len(&self) -> usize {
        self.m
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.cross.dim();
        let p = self.per_coord;
        let mut table = vec![0.0; d * p];
        for (j, chunk) in table.chunks_mut(p).enumerate() {
            self.family.eval_all(x[j], chunk);
        }
        for (o, idx) in out[..self.m].iter_mut().zip(self.cross.indices()) {
            let mut v = 1.0;
            for (j, &k) in idx.0.iter().enumerate() {
                v *= table[j * p + k];
            }
            *o = v;
        }
    }

    fn measure(&self) -> MeasureId {
        self.family.measure()
    }

    fn label(&self) -> String {
        format!("{}-mix d={}", self.family.id(), self.cross.dim())
    }
}
