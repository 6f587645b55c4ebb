//! Global intrinsic-dimension estimation by fitting the sphere model to the
//! empirical correlation integral.
//!
//! The pipeline: center the data and project it onto the unit sphere, build
//! the empirical correlation integral of the projected samples, subsample it,
//! and fit the model CDF with dimension and radius free. Projection removes
//! one degree of freedom, so the reported estimate is the fitted sphere
//! dimension plus one.

use rayon::prelude::*;

use crate::corr::{empirical_correlation_integral, subsample_curve, EcdfCurve};
use crate::data::{center_and_project, pairwise_distances, DataSet, RngHandle};
use crate::error::{Error, Result};
use crate::model::{fci_cdf_raw, FciParams};

/// Lower bound of the dimension search box.
const D_FLOOR: f64 = 0.1;

/// Configuration of the global estimator.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Maximum number of curve points kept for the fit.
    pub subsample: usize,
    /// Minimum number of samples accepted.
    pub min_samples: usize,
    /// Upper bound for the fitted dimension; `None` picks
    /// `max(2 * ambient_dim, 2048)`.
    pub d_max: Option<f64>,
    /// Run the full grid of starting dimensions instead of a single start.
    pub multistart: bool,
    /// Seed handle for curve subsampling.
    pub rng: RngHandle,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            subsample: 1000,
            min_samples: 5,
            d_max: None,
            multistart: true,
            rng: RngHandle::new(0),
        }
    }
}

/// Result of one nonlinear fit of the sphere model.
#[derive(Debug, Clone)]
pub struct FciFit {
    /// Fitted sphere dimension of the projected data.
    pub d_sphere: f64,
    /// Fitted sphere radius.
    pub r_s: f64,
    /// Residual sum of squares at the optimum.
    pub rss: f64,
    /// Number of curve points used.
    pub n_curve_points: usize,
    /// Whether the best start met a convergence criterion.
    pub converged: bool,
    /// (initial dimension, final rss) for every start that ran.
    pub multistart_log: Vec<(f64, f64)>,
}

/// Intrinsic-dimension estimate for a dataset.
#[derive(Debug, Clone)]
pub struct IdEstimate {
    /// Estimated intrinsic dimension: fitted sphere dimension plus one.
    pub d_est: f64,
    pub fit: FciFit,
    pub n_samples_used: usize,
}

/// Search-box options for [`fit_fci_with`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub d_max: f64,
    pub multistart: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            d_max: 2048.0,
            multistart: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    d_lo: f64,
    d_hi: f64,
    rs_lo: f64,
    rs_hi: f64,
}

impl Bounds {
    fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.d_lo, self.d_hi),
            p[1].clamp(self.rs_lo, self.rs_hi),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct LmRun {
    d: f64,
    rs: f64,
    rss: f64,
    converged: bool,
}

fn eval_residuals(radii: &[f64], rhos: &[f64], d: f64, rs: f64, out: &mut [f64]) {
    let inv = 1.0 / rs;
    for ((o, &r), &rho) in out.iter_mut().zip(radii).zip(rhos) {
        *o = fci_cdf_raw(r * inv, d) - rho;
    }
}

fn sum_squares(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// Damped Gauss-Newton minimization of the squared curve misfit inside a box.
///
/// The Jacobian is taken by central finite differences with step
/// 1e-5 * max(1, |param|). Convergence: relative objective decrease below
/// 1e-10, gradient norm below 1e-8, or no descent step available.
fn lm_fit(radii: &[f64], rhos: &[f64], d0: f64, rs0: f64, bounds: &Bounds) -> LmRun {
    let m = radii.len();
    let mut p = bounds.clamp([d0, rs0]);
    let mut res = vec![0.0f64; m];
    eval_residuals(radii, rhos, p[0], p[1], &mut res);
    let mut rss = sum_squares(&res);
    let mut lambda = 1e-3;
    let mut converged = false;

    let mut plus = vec![0.0f64; m];
    let mut minus = vec![0.0f64; m];
    let mut jac_d = vec![0.0f64; m];
    let mut jac_rs = vec![0.0f64; m];
    let mut trial_res = vec![0.0f64; m];

    'outer: for _ in 0..200 {
        let h_d = 1e-5 * p[0].abs().max(1.0);
        let mut h_rs = 1e-5 * p[1].abs().max(1.0);
        if p[1] - h_rs <= 0.0 {
            h_rs = 0.5 * p[1];
        }
        eval_residuals(radii, rhos, p[0] + h_d, p[1], &mut plus);
        eval_residuals(radii, rhos, (p[0] - h_d).max(1e-12), p[1], &mut minus);
        for k in 0..m {
            jac_d[k] = (plus[k] - minus[k]) / (2.0 * h_d);
        }
        eval_residuals(radii, rhos, p[0], p[1] + h_rs, &mut plus);
        eval_residuals(radii, rhos, p[0], p[1] - h_rs, &mut minus);
        for k in 0..m {
            jac_rs[k] = (plus[k] - minus[k]) / (2.0 * h_rs);
        }

        let mut a00 = 0.0;
        let mut a01 = 0.0;
        let mut a11 = 0.0;
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        for k in 0..m {
            a00 += jac_d[k] * jac_d[k];
            a01 += jac_d[k] * jac_rs[k];
            a11 += jac_rs[k] * jac_rs[k];
            g0 += jac_d[k] * res[k];
            g1 += jac_rs[k] * res[k];
        }
        if (g0 * g0 + g1 * g1).sqrt() < 1e-8 {
            converged = true;
            break;
        }

        loop {
            let m00 = a00 * (1.0 + lambda);
            let m11 = a11 * (1.0 + lambda);
            let det = m00 * m11 - a01 * a01;
            if det.abs() > 1e-300 {
                let step_d = (-m11 * g0 + a01 * g1) / det;
                let step_rs = (a01 * g0 - m00 * g1) / det;
                let trial = bounds.clamp([p[0] + step_d, p[1] + step_rs]);
                if trial != p {
                    eval_residuals(radii, rhos, trial[0], trial[1], &mut trial_res);
                    let trial_rss = sum_squares(&trial_res);
                    if trial_rss < rss {
                        let rel = (rss - trial_rss) / rss.max(1e-300);
                        p = trial;
                        std::mem::swap(&mut res, &mut trial_res);
                        rss = trial_rss;
                        lambda = (lambda / 3.0).max(1e-12);
                        if rel < 1e-10 {
                            converged = true;
                            break 'outer;
                        }
                        continue 'outer;
                    }
                }
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                // No descent step exists at any damping: the decrease is zero.
                converged = true;
                break 'outer;
            }
        }
    }

    LmRun {
        d: p[0],
        rs: p[1],
        rss,
        converged,
    }
}

fn validate_curve(curve: &EcdfCurve) -> Result<()> {
    if curve.len() < 4 {
        return Err(Error::UnfittableCurve(format!(
            "need at least 4 curve points, got {}",
            curve.len()
        )));
    }
    let mut distinct_interior = 0usize;
    let mut last = f64::NAN;
    for &f in curve.fractions() {
        if f > 0.0 && f < 1.0 && f != last {
            distinct_interior += 1;
            last = f;
        }
    }
    if distinct_interior < 3 {
        return Err(Error::UnfittableCurve(format!(
            "need at least 3 distinct fractions strictly inside (0, 1), got {distinct_interior}"
        )));
    }
    let max_r = *curve.radii().last().expect("nonempty");
    if !(max_r > 0.0) {
        return Err(Error::UnfittableCurve("all distances are zero".into()));
    }
    Ok(())
}

/// Fits the sphere model to a curve with default options.
pub fn fit_fci(curve: &EcdfCurve, init: Option<FciParams>) -> Result<FciFit> {
    fit_fci_with(curve, init, &FitOptions::default())
}

/// Fits the sphere model (dimension, radius) to an empirical curve by
/// bounded nonlinear least squares over a grid of starting dimensions.
pub fn fit_fci_with(
    curve: &EcdfCurve,
    init: Option<FciParams>,
    opts: &FitOptions,
) -> Result<FciFit> {
    validate_curve(curve)?;
    if !(opts.d_max > D_FLOOR) || !opts.d_max.is_finite() {
        return Err(Error::Domain(format!(
            "dimension bound must exceed {D_FLOOR}, got {}",
            opts.d_max
        )));
    }
    let radii = curve.radii();
    let rhos = curve.fractions();
    let max_r = *radii.last().expect("nonempty");
    let bounds = Bounds {
        d_lo: D_FLOOR,
        d_hi: opts.d_max,
        rs_lo: 1e-6 * max_r,
        rs_hi: 10.0 * max_r,
    };
    // The model's half height sits at sqrt(2) * r_s, so the median distance
    // over sqrt(2) is a natural radius start.
    let rs0 = (radii[radii.len() / 2] / std::f64::consts::SQRT_2)
        .clamp(bounds.rs_lo, bounds.rs_hi);

    let mut starts: Vec<(f64, f64)> = Vec::new();
    if opts.multistart {
        let top = opts.d_max.log2().ceil() as i32;
        for k in 0..=top.max(0) {
            let d0 = 2f64.powi(k).min(opts.d_max);
            if starts.last().map(|&(d, _)| d) != Some(d0) {
                starts.push((d0, rs0));
            }
        }
    }
    if let Some(params) = init {
        starts.push((params.d, params.r_s));
    }
    if starts.is_empty() {
        starts.push((8.0, rs0));
    }

    let runs: Vec<LmRun> = starts
        .par_iter()
        .map(|&(d0, r0)| lm_fit(radii, rhos, d0, r0, &bounds))
        .collect();

    let mut best = 0usize;
    for (i, run) in runs.iter().enumerate() {
        if run.rss < runs[best].rss {
            best = i;
        }
    }
    let winner = runs[best];
    Ok(FciFit {
        d_sphere: winner.d,
        r_s: winner.rs,
        rss: winner.rss,
        n_curve_points: curve.len(),
        converged: winner.converged,
        multistart_log: starts
            .iter()
            .zip(&runs)
            .map(|(&(d0, _), run)| (d0, run.rss))
            .collect(),
    })
}

/// Global estimate: project, build and subsample the empirical correlation
/// integral, fit the sphere model, and report the fitted dimension plus one.
pub fn estimate_id_global(data: &DataSet, cfg: &EstimatorConfig) -> Result<IdEstimate> {
    if data.n_samples() < cfg.min_samples {
        return Err(Error::InvalidInput(format!(
            "estimation needs at least {} samples, got {}",
            cfg.min_samples,
            data.n_samples()
        )));
    }
    let projected = center_and_project(data)?;
    let dists = pairwise_distances(&projected)?;
    let curve = empirical_correlation_integral(&dists)?;
    let sub = subsample_curve(&curve, cfg.subsample, &cfg.rng)?;
    let d_max = cfg
        .d_max
        .unwrap_or_else(|| (2.0 * data.ambient_dim() as f64).max(2048.0));
    let fit = fit_fci_with(
        &sub,
        None,
        &FitOptions {
            d_max,
            multistart: cfg.multistart,
        },
    )?;
    Ok(IdEstimate {
        d_est: fit.d_sphere + 1.0,
        n_samples_used: data.n_samples(),
        fit,
    })
}
