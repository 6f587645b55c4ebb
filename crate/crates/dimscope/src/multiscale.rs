//! Local estimation over neighborhoods of growing scale.
//!
//! Around a chosen center, the global estimator is applied to the points
//! inside a cutoff radius (or to the k nearest neighbors), producing a local
//! estimate per scale. On curved manifolds the local estimates form a plateau
//! near the true dimension at intermediate scales; the summary reported here
//! is the minimum reliable local estimate, taken per center and then across
//! centers. The per-center minima are kept so multimodal datasets remain
//! inspectable.

use rayon::prelude::*;

use crate::data::{distances_to, DataSet, RngHandle};
use crate::error::{Error, Result};
use crate::estimator::{estimate_id_global, EstimatorConfig};

/// Neighborhood scale: a cutoff radius or a neighbor count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Radius(f64),
    Knn(usize),
}

impl Scale {
    pub fn kind(&self) -> &'static str {
        match self {
            Scale::Radius(_) => "radius",
            Scale::Knn(_) => "knn",
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Scale::Radius(r) => *r,
            Scale::Knn(n) => *n as f64,
        }
    }

    fn validate(&self, n_samples: usize) -> Result<()> {
        match self {
            Scale::Radius(r) => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "cutoff radius must be positive and finite, got {r}"
                    )));
                }
            }
            Scale::Knn(n) => {
                if *n < 2 || *n + 1 > n_samples {
                    return Err(Error::InvalidInput(format!(
                        "neighbor count must lie in [2, {}], got {n}",
                        n_samples.saturating_sub(1)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One (scale, local estimate) record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEntry {
    pub scale: Scale,
    /// Number of neighbors in the neighborhood, excluding the center.
    pub n_neighbors: usize,
    /// Local estimate; absent when the neighborhood was too small or the fit
    /// failed outright.
    pub d_est: Option<f64>,
    /// True when the neighborhood had enough neighbors and the fit converged.
    pub reliable: bool,
}

/// Local estimates for one center, ordered by increasing scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleProfile {
    pub center_index: usize,
    pub entries: Vec<ScaleEntry>,
}

impl ScaleProfile {
    /// Minimum reliable local estimate, if any entry qualifies.
    pub fn min_reliable(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.reliable)
            .filter_map(|e| e.d_est)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }
}

/// Multiscale sweep over several centers.
#[derive(Debug, Clone)]
pub struct MultiscaleResult {
    pub profiles: Vec<ScaleProfile>,
    /// Minimum over centers of the per-center reliable minima.
    pub d_summary: f64,
    /// (center index, minimum reliable estimate) for centers that had one.
    pub per_center_minima: Vec<(usize, f64)>,
}

/// Configuration of the local sweeps.
#[derive(Debug, Clone)]
pub struct MultiscaleConfig {
    /// Neighbor count below which a local estimate is flagged unreliable.
    pub n_reliable: usize,
    /// Estimator used on each neighborhood; its rng seeds the per-scale
    /// subsampling substreams.
    pub estimator: EstimatorConfig,
}

impl Default for MultiscaleConfig {
    fn default() -> Self {
        Self {
            n_reliable: 20,
            estimator: EstimatorConfig::default(),
        }
    }
}

/// Indices of the neighborhood of `center` at the given scale, ascending.
///
/// Radius scales take every sample strictly inside the cutoff (the center
/// included); neighbor scales take the center plus its n nearest rows,
/// breaking distance ties by ascending sample index.
pub fn neighborhood_indices(data: &DataSet, center: usize, scale: &Scale) -> Result<Vec<usize>> {
    scale.validate(data.n_samples())?;
    let dists = distances_to(data, center)?;
    let mut indices: Vec<usize> = match scale {
        Scale::Radius(rc) => (0..data.n_samples()).filter(|&i| dists[i] < *rc).collect(),
        Scale::Knn(n) => {
            let mut others: Vec<usize> = (0..data.n_samples()).filter(|&i| i != center).collect();
            others.sort_unstable_by(|&a, &b| {
                dists[a].total_cmp(&dists[b]).then(a.cmp(&b))
            });
            others.truncate(*n);
            others.push(center);
            others
        }
    };
    indices.sort_unstable();
    Ok(indices)
}

/// The neighborhood of `center` as a dataset, rows in original index order.
pub fn neighborhood(data: &DataSet, center: usize, scale: &Scale) -> Result<DataSet> {
    let indices = neighborhood_indices(data, center, scale)?;
    data.subset(&indices)
}

/// Local estimate at one (center, scale) pair.
///
/// Failures never error: an estimate is absent when the neighborhood holds
/// fewer than 5 samples or the fit fails, and unreliable when the neighbor
/// count is below `cfg.n_reliable` or the fit did not converge.
pub fn local_id(
    data: &DataSet,
    center: usize,
    scale: &Scale,
    cfg: &MultiscaleConfig,
) -> Result<ScaleEntry> {
    let indices = neighborhood_indices(data, center, scale)?;
    let n_neighbors = indices.len().saturating_sub(1);
    if indices.len() < 5 {
        return Ok(ScaleEntry {
            scale: *scale,
            n_neighbors,
            d_est: None,
            reliable: false,
        });
    }
    let subset = data.subset(&indices)?;
    match estimate_id_global(&subset, &cfg.estimator) {
        Ok(est) => Ok(ScaleEntry {
            scale: *scale,
            n_neighbors,
            d_est: Some(est.d_est),
            reliable: n_neighbors >= cfg.n_reliable && est.fit.converged,
        }),
        Err(_) => Ok(ScaleEntry {
            scale: *scale,
            n_neighbors,
            d_est: None,
            reliable: false,
        }),
    }
}

fn validate_scales(scales: &[Scale], n_samples: usize) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidInput("scale list is empty".into()));
    }
    for scale in scales {
        scale.validate(n_samples)?;
    }
    let mixed = scales
        .windows(2)
        .any(|w| std::mem::discriminant(&w[0]) != std::mem::discriminant(&w[1]));
    if mixed {
        return Err(Error::InvalidInput("scale list mixes radius and knn kinds".into()));
    }
    if scales.windows(2).any(|w| w[1].value() < w[0].value()) {
        return Err(Error::InvalidInput("scales must be sorted ascending".into()));
    }
    Ok(())
}

/// Scans all scales around one center; entries come back in scale order.
///
/// Each scale draws its subsampling substream from the estimator seed, keyed
/// by (center, scale position), so results do not depend on scheduling.
pub fn scale_profile(
    data: &DataSet,
    center: usize,
    scales: &[Scale],
    cfg: &MultiscaleConfig,
) -> Result<ScaleProfile> {
    validate_scales(scales, data.n_samples())?;
    let n_scales = scales.len() as u64;
    let entries: Vec<ScaleEntry> = scales
        .par_iter()
        .enumerate()
        .map(|(si, scale)| {
            let mut local_cfg = cfg.clone();
            local_cfg.estimator.rng = cfg
                .estimator
                .rng
                .substream(center as u64 * n_scales + si as u64);
            local_id(data, center, scale, &local_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleProfile {
        center_index: center,
        entries,
    })
}

/// Draws `n_centers` distinct sample indices uniformly, sorted ascending.
pub fn sample_centers(data: &DataSet, n_centers: usize, rng: &RngHandle) -> Result<Vec<usize>> {
    if n_centers == 0 || n_centers > data.n_samples() {
        return Err(Error::InvalidInput(format!(
            "center count must lie in [1, {}], got {n_centers}",
            data.n_samples()
        )));
    }
    let mut generator = rng.rng();
    let mut centers =
        rand::seq::index::sample(&mut generator, data.n_samples(), n_centers).into_vec();
    centers.sort_unstable();
    Ok(centers)
}

/// Multiscale sweep over explicit centers.
pub fn multiscale_with_centers(
    data: &DataSet,
    centers: &[usize],
    scales: &[Scale],
    cfg: &MultiscaleConfig,
) -> Result<MultiscaleResult> {
    if centers.is_empty() {
        return Err(Error::InvalidInput("center list is empty".into()));
    }
    validate_scales(scales, data.n_samples())?;
    let mut sorted = centers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let profiles: Vec<ScaleProfile> = sorted
        .par_iter()
        .map(|&c| scale_profile(data, c, scales, cfg))
        .collect::<Result<Vec<_>>>()?;
    let per_center_minima: Vec<(usize, f64)> = profiles
        .iter()
        .filter_map(|p| p.min_reliable().map(|m| (p.center_index, m)))
        .collect();
    if per_center_minima.is_empty() {
        return Err(Error::NoReliableScale);
    }
    let d_summary = per_center_minima
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::INFINITY, f64::min);
    Ok(MultiscaleResult {
        profiles,
        d_summary,
        per_center_minima,
    })
}

/// Multiscale sweep over randomly drawn centers.
pub fn multiscale_estimate(
    data: &DataSet,
    n_centers: usize,
    scales: &[Scale],
    rng: &RngHandle,
    cfg: &MultiscaleConfig,
) -> Result<MultiscaleResult> {
    let centers = sample_centers(data, n_centers, rng)?;
    multiscale_with_centers(data, &centers, scales, cfg)
}

/// Default neighbor-count grid: geometric from 20 with ratio sqrt(2), capped
/// and terminated at N - 1.
pub fn auto_knn_grid(n_samples: usize) -> Vec<Scale> {
    let top = n_samples.saturating_sub(1);
    let mut ns: Vec<usize> = Vec::new();
    let mut value = 20.0f64;
    while (value.round() as usize) < top {
        let n = value.round() as usize;
        if n >= 2 {
            ns.push(n);
        }
        value *= std::f64::consts::SQRT_2;
    }
    if top >= 2 {
        ns.push(top);
    }
    ns.dedup();
    ns.into_iter().map(Scale::Knn).collect()
}

/// Radius grid from pooled center-to-sample distance quantiles
/// {0.05, 0.10, ..., 1.0}. The top radius is inflated a hair so the largest
/// ball reaches the whole dataset.
pub fn auto_radius_grid(data: &DataSet, centers: &[usize]) -> Result<Vec<Scale>> {
    if centers.is_empty() {
        return Err(Error::InvalidInput("center list is empty".into()));
    }
    let mut pooled: Vec<f64> = Vec::with_capacity(centers.len() * data.n_samples());
    for &c in centers {
        let d = distances_to(data, c)?;
        pooled.extend(d.into_iter().filter(|&v| v > 0.0));
    }
    if pooled.is_empty() {
        return Err(Error::InvalidInput("all center distances are zero".into()));
    }
    pooled.sort_unstable_by(f64::total_cmp);
    let mut radii: Vec<f64> = Vec::new();
    for step in 1..=20 {
        let q = step as f64 / 20.0;
        let pos = q * (pooled.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        let mut r = pooled[lo] * (1.0 - frac) + pooled[hi] * frac;
        if step == 20 {
            r *= 1.0 + 1e-9;
        }
        if radii.last().map_or(true, |&prev| r > prev) {
            radii.push(r);
        }
    }
    Ok(radii.into_iter().map(Scale::Radius).collect())
}
