//! Immutable datasets, seeded substream randomness, and pairwise distances.
//!
//! A [`DataSet`] is an N x D matrix of real samples, one row per sample. Row
//! order is significant: indices identify samples and no operation in this
//! crate reorders them. All operations here are pure, so datasets can be
//! shared freely across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Immutable N x D sample matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: Vec<f64>,
    n_samples: usize,
    ambient_dim: usize,
}

impl DataSet {
    /// Builds a dataset from a flat row-major buffer.
    pub fn new(points: Vec<f64>, n_samples: usize, ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput(
                "ambient dimension must be positive".into(),
            ));
        }
        if points.len() != n_samples * ambient_dim {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {} x {} dataset, got {}",
                n_samples * ambient_dim,
                n_samples,
                ambient_dim,
                points.len()
            )));
        }
        Ok(Self {
            points,
            n_samples,
            ambient_dim,
        })
    }

    /// Builds a dataset from sample rows, which must all share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("rows have unequal lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(flat, rows.len(), dim.max(1))
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.points[index * self.ambient_dim..(index + 1) * self.ambient_dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.points.chunks_exact(self.ambient_dim)
    }

    /// Flat row-major view of all coordinates.
    pub fn values(&self) -> &[f64] {
        &self.points
    }

    /// Copies the given rows (in the given order) into a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.ambient_dim);
        for &i in indices {
            if i >= self.n_samples {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range for {} samples",
                    self.n_samples
                )));
            }
            points.extend_from_slice(self.row(i));
        }
        Self::new(points, indices.len(), self.ambient_dim)
    }

    /// Errors with the first row containing a NaN or infinity.
    pub fn validate_finite(&self) -> Result<()> {
        for (row, values) in self.rows().enumerate() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry { row });
            }
        }
        Ok(())
    }
}

/// Seed plus stream id for a counter-based generator.
///
/// Identical `(seed, stream)` pairs replay identical draws regardless of how
/// work is scheduled across threads. Handles are cheap to copy; derive an
/// independent generator per task with [`RngHandle::substream`] instead of
/// sharing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives an independent substream; deterministic in `(self, key)`.
    pub fn substream(&self, key: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(key)),
        }
    }

    /// Instantiates the generator for this (seed, stream) pair.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl Default for RngHandle {
    fn default() -> Self {
        Self::new(0)
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// All N(N-1)/2 Euclidean pair distances, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceList {
    values: Vec<f64>,
}

impl DistanceList {
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Linearly interpolated quantile, `q` in [0, 1].
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("empty distance list".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidInput(format!(
                "quantile {q} outside [0, 1]"
            )));
        }
        let pos = q * (self.values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        Ok(self.values[lo] * (1.0 - frac) + self.values[hi] * frac)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc.sqrt()
}

/// Computes all pair distances, sorted ascending.
///
/// Work is partitioned over row blocks; each distance accumulates its sum in
/// double precision, so the sorted output is identical for any thread count.
pub fn pairwise_distances(data: &DataSet) -> Result<DistanceList> {
    if data.n_samples() < 2 {
        return Err(Error::InvalidInput(
            "pairwise distances require at least 2 samples".into(),
        ));
    }
    data.validate_finite()?;
    let n = data.n_samples();
    let mut values: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = data.row(i);
            (i + 1..n).map(move |j| euclidean(xi, data.row(j)))
        })
        .collect();
    values.par_sort_unstable_by(f64::total_cmp);
    Ok(DistanceList::from_sorted(values))
}

/// Distance from every row to the given row, in row order.
pub fn distances_to(data: &DataSet, center: usize) -> Result<Vec<f64>> {
    if center >= data.n_samples() {
        return Err(Error::InvalidInput(format!(
            "center index {center} out of range for {} samples",
            data.n_samples()
        )));
    }
    let c = data.row(center);
    Ok(data.rows().map(|r| euclidean(c, r)).collect())
}

/// Subtracts the center of mass and rescales every sample to unit norm.
///
/// The degeneracy threshold is relative to the largest centered norm, so the
/// check does not depend on the data's units.
pub fn center_and_project(data: &DataSet) -> Result<DataSet> {
    if data.n_samples() < 2 {
        return Err(Error::InvalidInput(
            "centering requires at least 2 samples".into(),
        ));
    }
    data.validate_finite()?;
    let n = data.n_samples();
    let dim = data.ambient_dim();

    let mut mean = vec![0.0f64; dim];
    for row in data.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut centered = Vec::with_capacity(n * dim);
    let mut norms = Vec::with_capacity(n);
    for row in data.rows() {
        let start = centered.len();
        for (v, m) in row.iter().zip(&mean) {
            centered.push(v - m);
        }
        let norm = centered[start..].iter().map(|v| v * v).sum::<f64>().sqrt();
        norms.push(norm);
    }

    let max_norm = norms.iter().cloned().fold(0.0f64, f64::max);
    if max_norm == 0.0 {
        return Err(Error::DegenerateSample { row: 0 });
    }
    let tau = 1e-9 * max_norm;
    if let Some(row) = norms.iter().position(|&n| n < tau) {
        return Err(Error::DegenerateSample { row });
    }

    for (i, chunk) in centered.chunks_exact_mut(dim).enumerate() {
        let inv = 1.0 / norms[i];
        for v in chunk {
            *v *= inv;
        }
    }
    DataSet::new(centered, n, dim)
}
