//! Reference estimators: correlation-dimension slope, global PCA criteria,
//! and multiscale PCA spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::corr::empirical_correlation_integral;
use crate::data::{distances_to, pairwise_distances, DataSet};
use crate::error::{Error, Result};

/// Default quantile band of pair distances used for the log-log slope fit.
pub const DEFAULT_CORRDIM_BAND: (f64, f64) = (0.0005, 0.05);

/// Result of the correlation-dimension slope fit.
#[derive(Debug, Clone)]
pub struct CorrDimFit {
    /// Slope of log(fraction) against log(distance) over the band.
    pub d_est: f64,
    /// Quantile band of pair distances the fit used.
    pub fit_band: (f64, f64),
    pub n_points_used: usize,
    /// Goodness of the log-log linear fit.
    pub r_squared: f64,
}

/// Correlation dimension: ordinary least squares on the log-log curve over a
/// small-distance quantile band.
pub fn corrdim_estimate(data: &DataSet, band: (f64, f64)) -> Result<CorrDimFit> {
    let (q_lo, q_hi) = band;
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo >= q_hi {
        return Err(Error::InvalidInput(format!(
            "invalid quantile band ({q_lo}, {q_hi})"
        )));
    }
    if data.n_samples() < 10 {
        return Err(Error::InvalidInput(
            "correlation dimension needs at least 10 samples".into(),
        ));
    }
    let dists = pairwise_distances(data)?;
    let curve = empirical_correlation_integral(&dists)?;
    let r_lo = dists.quantile(q_lo)?;
    let r_hi = dists.quantile(q_hi)?;

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (r, rho) in curve.points() {
        if r > 0.0 && rho > 0.0 && r >= r_lo && r <= r_hi {
            xs.push(r.ln());
            ys.push(rho.ln());
        }
    }
    if xs.len() < 5 {
        return Err(Error::UnfittableCurve(format!(
            "only {} usable points in the quantile band ({q_lo}, {q_hi})",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::UnfittableCurve(
            "distance band has zero spread in log r".into(),
        ));
    }
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(Error::UnfittableCurve(format!(
            "log-log slope {slope} is not positive"
        )));
    }
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(CorrDimFit {
        d_est: slope,
        fit_band: band,
        n_points_used: xs.len(),
        r_squared,
    })
}

/// Eigenvalues of the covariance matrix of mean-centered data, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaSpectrum {
    eigenvalues: Vec<f64>,
}

impl PcaSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn centered_matrix(data: &DataSet) -> DMatrix<f64> {
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
    DMatrix::from_fn(n, dim, |i, j| data.row(i)[j] - mean[j])
}

/// Covariance eigenvalues, computed on the smaller of the D x D covariance or
/// the N x N Gram matrix (they share their nonzero spectrum), padded with
/// zeros to D and clipped at zero.
pub fn pca_spectrum(data: &DataSet) -> Result<PcaSpectrum> {
    if data.n_samples() < 2 {
        return Err(Error::InvalidInput(
            "a spectrum needs at least 2 samples".into(),
        ));
    }
    data.validate_finite()?;
    let n = data.n_samples();
    let dim = data.ambient_dim();
    let x = centered_matrix(data);
    let mut eigenvalues: Vec<f64> = if dim <= n {
        let cov = x.transpose() * &x / n as f64;
        SymmetricEigen::new(cov).eigenvalues.iter().copied().collect()
    } else {
        let gram = &x * x.transpose() / n as f64;
        SymmetricEigen::new(gram).eigenvalues.iter().copied().collect()
    };
    eigenvalues.sort_unstable_by(|a, b| b.total_cmp(a));
    for v in &mut eigenvalues {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    eigenvalues.resize(dim, 0.0);
    Ok(PcaSpectrum { eigenvalues })
}

/// PCA dimension criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GpcaCriterion {
    /// Largest ratio of consecutive sorted eigenvalues, with an implicit zero
    /// after the last one.
    Gap,
    /// Smallest count of leading eigenvalues holding the given variance mass.
    Mass(f64),
}

/// Relative level under which an eigenvalue counts as numerical dust when
/// forming gap ratios.
const GAP_DUST: f64 = 1e-12;

/// Dimension estimate from a spectrum.
///
/// The gap criterion scans `lambda_i / lambda_{i+1}` for i = 1..=D with
/// `lambda_{D+1} = 0` and the denominator floored at 1e-300; eigenvalues
/// below `1e-12 * lambda_1` are treated as exact zeros so solver dust cannot
/// fake a jump.
pub fn gpca_estimate(spectrum: &PcaSpectrum, criterion: GpcaCriterion) -> Result<usize> {
    let eig = spectrum.eigenvalues();
    if eig.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let total: f64 = eig.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    match criterion {
        GpcaCriterion::Gap => {
            let cutoff = GAP_DUST * eig[0];
            let clean = |v: f64| if v < cutoff { 0.0 } else { v };
            let mut best_i = 1;
            let mut best_ratio = f64::NEG_INFINITY;
            for i in 0..eig.len() {
                let top = clean(eig[i]);
                if top == 0.0 {
                    continue;
                }
                let next = if i + 1 < eig.len() { clean(eig[i + 1]) } else { 0.0 };
                let ratio = top / next.max(1e-300);
                if ratio > best_ratio {
                    best_ratio = ratio;
                    best_i = i + 1;
                }
            }
            Ok(best_i)
        }
        GpcaCriterion::Mass(target) => {
            if !(0.0 < target && target <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "mass target must lie in (0, 1], got {target}"
                )));
            }
            let mut acc = 0.0;
            for (i, v) in eig.iter().enumerate() {
                acc += v;
                if acc / total >= target {
                    return Ok(i + 1);
                }
            }
            Ok(eig.len())
        }
    }
}

/// Averaged local spectra per cutoff radius.
#[derive(Debug, Clone)]
pub struct MpcaProfile {
    /// Radii that had at least one usable ball.
    pub radii: Vec<f64>,
    /// Per-radius average of the local spectra (each padded to D).
    pub avg_spectra: Vec<Vec<f64>>,
    /// Per-radius 0.95-mass estimate on the averaged spectrum.
    pub mass_by_scale: Vec<usize>,
    /// (min, max) of the per-radius mass estimates; absent if no radius was
    /// usable.
    pub mass_bound: Option<(usize, usize)>,
}

/// Multiscale PCA: average local spectra over balls around the given centers
/// at each radius, and track the 0.95-mass criterion per scale.
///
/// Balls with fewer than 5 points are skipped; radii with no usable ball are
/// dropped.
pub fn mpca_profile(data: &DataSet, centers: &[usize], radii: &[f64]) -> Result<MpcaProfile> {
    if centers.is_empty() {
        return Err(Error::InvalidInput("center list is empty".into()));
    }
    if radii.is_empty() {
        return Err(Error::InvalidInput("radius list is empty".into()));
    }
    for &c in centers {
        if c >= data.n_samples() {
            return Err(Error::InvalidInput(format!(
                "center index {c} out of range for {} samples",
                data.n_samples()
            )));
        }
    }
    let dim = data.ambient_dim();
    let center_dists: Vec<Vec<f64>> = centers
        .iter()
        .map(|&c| distances_to(data, c))
        .collect::<Result<Vec<_>>>()?;

    let mut kept_radii = Vec::new();
    let mut avg_spectra = Vec::new();
    let mut mass_by_scale = Vec::new();
    for &radius in radii {
        if !(radius > 0.0) {
            continue;
        }
        let spectra: Vec<Vec<f64>> = center_dists
            .par_iter()
            .filter_map(|dists| {
                let ball: Vec<usize> = (0..data.n_samples())
                    .filter(|&i| dists[i] < radius)
                    .collect();
                if ball.len() < 5 {
                    return None;
                }
                let subset = data.subset(&ball).ok()?;
                pca_spectrum(&subset)
                    .ok()
                    .map(|s| s.eigenvalues().to_vec())
            })
            .collect();
        if spectra.is_empty() {
            continue;
        }
        let mut avg = vec![0.0f64; dim];
        for spectrum in &spectra {
            for (a, v) in avg.iter_mut().zip(spectrum) {
                *a += v;
            }
        }
        for a in &mut avg {
            *a /= spectra.len() as f64;
        }
        let mass = gpca_estimate(
            &PcaSpectrum {
                eigenvalues: avg.clone(),
            },
            GpcaCriterion::Mass(0.95),
        );
        if let Ok(mass) = mass {
            kept_radii.push(radius);
            avg_spectra.push(avg);
            mass_by_scale.push(mass);
        }
    }
    let mass_bound = if mass_by_scale.is_empty() {
        None
    } else {
        Some((
            *mass_by_scale.iter().min().expect("nonempty"),
            *mass_by_scale.iter().max().expect("nonempty"),
        ))
    };
    Ok(MpcaProfile {
        radii: kept_radii,
        avg_spectra,
        mass_by_scale,
        mass_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngHandle;
    use crate::datasets;

    #[test]
    fn line_has_rank_one_spectrum() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|k| {
                let t = k as f64 / 10.0 - 1.0;
                vec![2.0 * t, -t, 0.5 * t]
            })
            .collect();
        let data = DataSet::from_rows(&rows).unwrap();
        let spectrum = pca_spectrum(&data).unwrap();
        let eig = spectrum.eigenvalues();
        assert_eq!(eig.len(), 3);
        assert!(eig[0] > 0.0);
        assert!(eig[1] < 1e-12 * eig[0]);
        assert!(eig[2] < 1e-12 * eig[0]);
        assert_eq!(gpca_estimate(&spectrum, GpcaCriterion::Gap).unwrap(), 1);
    }

    #[test]
    fn isotropic_gaussian_spectrum_is_flat() {
        let data = datasets::gen_gaussian(10, 10, 5000, &RngHandle::new(14)).unwrap();
        let spectrum = pca_spectrum(&data).unwrap();
        let eig = spectrum.eigenvalues();
        let lo = eig.last().unwrap();
        let hi = eig.first().unwrap();
        assert!(hi / lo < 1.1 / 0.9, "spread {} vs {}", hi, lo);
    }

    #[test]
    fn embedded_cube_has_exact_rank() {
        let data = datasets::gen_hypercube(20, 50, 1000, &RngHandle::new(9)).unwrap();
        let spectrum = pca_spectrum(&data).unwrap();
        let eig = spectrum.eigenvalues();
        for (i, &v) in eig.iter().enumerate().skip(20) {
            assert!(v < 1e-8 * eig[0], "eigenvalue {i} = {v}");
        }
        assert_eq!(gpca_estimate(&spectrum, GpcaCriterion::Gap).unwrap(), 20);
        assert_eq!(
            gpca_estimate(&spectrum, GpcaCriterion::Mass(0.95)).unwrap(),
            19
        );
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        // 30 samples in 12 dims vs the same data transposed into the n < D
        // regime exercise both code paths on one spectrum.
        let data = datasets::gen_gaussian(4, 12, 30, &RngHandle::new(3)).unwrap();
        let narrow = pca_spectrum(&data).unwrap();
        let wide_data = datasets::gen_gaussian(4, 40, 20, &RngHandle::new(3)).unwrap();
        let wide = pca_spectrum(&wide_data).unwrap();
        assert_eq!(wide.len(), 40);
        // Rank cannot exceed the sample count; padding supplies the rest.
        assert!(wide.eigenvalues()[20..].iter().all(|&v| v == 0.0));
        assert_eq!(narrow.len(), 12);
    }

    #[test]
    fn spectrum_is_rotation_invariant() {
        let rng = RngHandle::new(25);
        let data = datasets::gen_gaussian(5, 15, 300, &rng).unwrap();
        let rotated = datasets::linear_embed(&data, 15, &rng.substream(77)).unwrap();
        let a = pca_spectrum(&data).unwrap();
        let b = pca_spectrum(&rotated).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-8 * x.max(1e-8));
        }
    }

    #[test]
    fn gap_criterion_is_scale_free() {
        let data = datasets::gen_hypercube(7, 21, 400, &RngHandle::new(30)).unwrap();
        let scaled_values: Vec<f64> = data.values().iter().map(|v| v * 123.4).collect();
        let scaled = DataSet::new(scaled_values, 400, 21).unwrap();
        let a = gpca_estimate(&pca_spectrum(&data).unwrap(), GpcaCriterion::Gap).unwrap();
        let b = gpca_estimate(&pca_spectrum(&scaled).unwrap(), GpcaCriterion::Gap).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 7);
    }

    #[test]
    fn corrdim_recovers_low_dimensions() {
        for &d in &[2usize, 3, 5] {
            let data =
                datasets::gen_hypercube(d, 2 * d, 2000, &RngHandle::new(40 + d as u64)).unwrap();
            let fit = corrdim_estimate(&data, DEFAULT_CORRDIM_BAND).unwrap();
            assert!(
                (fit.d_est - d as f64).abs() < 0.3,
                "corrdim on H({d}, {}) gave {}",
                2 * d,
                fit.d_est
            );
            assert!(fit.r_squared > 0.9);
        }
    }

    #[test]
    fn corrdim_rejects_bad_bands() {
        let data = datasets::gen_hypercube(2, 4, 100, &RngHandle::new(1)).unwrap();
        assert!(corrdim_estimate(&data, (0.5, 0.2)).is_err());
        assert!(corrdim_estimate(&data, (-0.1, 0.2)).is_err());
        let tiny = datasets::gen_hypercube(2, 4, 8, &RngHandle::new(1)).unwrap();
        assert!(corrdim_estimate(&tiny, DEFAULT_CORRDIM_BAND).is_err());
    }

    #[test]
    fn degenerate_spectrum_errors() {
        let data = DataSet::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let spectrum = pca_spectrum(&data).unwrap();
        assert!(matches!(
            gpca_estimate(&spectrum, GpcaCriterion::Gap),
            Err(Error::DegenerateSpectrum)
        ));
    }

    #[test]
    fn mpca_on_linear_data_is_stable_at_rank() {
        let data = datasets::gen_hypercube(10, 30, 2000, &RngHandle::new(55)).unwrap();
        let dists = pairwise_distances(&data).unwrap();
        let centers: Vec<usize> = (0..10).map(|k| k * 199).collect();
        let radii: Vec<f64> = [0.3, 0.4, 0.5, 0.6, 0.7]
            .iter()
            .map(|&q| dists.quantile(q).unwrap())
            .collect();
        let profile = mpca_profile(&data, &centers, &radii).unwrap();
        assert!(!profile.radii.is_empty());
        // Mid-range scales see the full rank of the linear manifold.
        for (&r, &mass) in profile.radii.iter().zip(&profile.mass_by_scale) {
            assert!(
                (9..=11).contains(&mass),
                "mass criterion {mass} at radius {r}"
            );
        }
        let (lo, hi) = profile.mass_bound.unwrap();
        assert!(lo >= 9 && hi <= 11);
    }
}
