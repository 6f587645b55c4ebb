//! Analytic average correlation integral of a uniformly sampled hypersphere.
//!
//! For points drawn uniformly from the sphere of radius `r_s` in dimension
//! `d`, the expected fraction of pairs within distance `r` is a sigmoid in
//! the reduced radius `rbar = r / r_s`:
//!
//! ```text
//! rho(rbar) = (Omega_{d-1} / Omega_d) * integral_0^theta sin^{d-1}(b) db,
//! cos(theta) = 1 - rbar^2 / 2.
//! ```
//!
//! The production evaluation ([`fci_cdf`]) maps this integral onto the
//! regularized incomplete beta function, which is stable for any real d > 0.
//! Two independent reference routes are kept for verification: direct
//! adaptive quadrature of the integral ([`fci_cdf_quadrature`]) and the
//! terminating hypergeometric polynomial for even integer d
//! ([`fci_cdf_even_series`]).

use crate::error::{Error, Result};
use crate::special::{ln_gamma, reg_inc_beta_with_complement};

/// Parameters of the sphere model: real dimension `d` and radius `r_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FciParams {
    pub d: f64,
    pub r_s: f64,
}

impl FciParams {
    pub fn new(d: f64, r_s: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("dimension must be positive, got {d}")));
        }
        if !(r_s > 0.0) || !r_s.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {r_s}")));
        }
        Ok(Self { d, r_s })
    }
}

/// Ratio of solid angles Omega_{d-1} / Omega_d = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2)).
pub fn solid_angle_ratio(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("dimension must be positive, got {d}")));
    }
    Ok((ln_gamma((d + 1.0) / 2.0) - ln_gamma(d / 2.0)).exp() / std::f64::consts::PI.sqrt())
}

/// Sphere-pair distance CDF at reduced radius `rbar`, for real dimension d > 0.
///
/// Radii at or beyond the support edge `rbar = 2` are clamped to 1, so the
/// model stays defined when a fit proposes a small `r_s`.
pub fn fci_cdf(rbar: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("dimension must be positive, got {d}")));
    }
    if !(rbar >= 0.0) {
        return Err(Error::Domain(format!("radius must be non-negative, got {rbar}")));
    }
    Ok(fci_cdf_raw(rbar, d))
}

/// Unchecked evaluation; callers guarantee d > 0 and rbar >= 0.
pub(crate) fn fci_cdf_raw(rbar: f64, d: f64) -> f64 {
    if rbar <= 0.0 {
        return 0.0;
    }
    if rbar >= 2.0 {
        return 1.0;
    }
    let cos_t = 1.0 - rbar * rbar / 2.0;
    // sin^2(theta) = rbar^2 (2 - rbar)(2 + rbar) / 4, kept in factored form so
    // radii near the support edge do not cancel.
    let x = (rbar * rbar * (2.0 - rbar) * (2.0 + rbar) / 4.0).clamp(0.0, 1.0);
    let xc = (cos_t * cos_t).clamp(0.0, 1.0);
    let ib = reg_inc_beta_with_complement(d / 2.0, 0.5, x, xc);
    if cos_t >= 0.0 {
        0.5 * ib
    } else {
        1.0 - 0.5 * ib
    }
}

/// Model value at an absolute distance `r`, i.e. the CDF at `r / r_s`.
pub fn fci_model_value(r: f64, params: &FciParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("distance must be non-negative, got {r}")));
    }
    fci_cdf(r / params.r_s, params.d)
}

/// Derivative of the CDF with respect to `rbar` (the model's density).
///
/// This is the spherical integrand expressed back in the reduced radius:
/// `(Omega_{d-1}/Omega_d) sin^{d-2}(theta) rbar`. Exposed for fit
/// diagnostics; zero outside the open support (0, 2).
pub fn fci_density(rbar: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("dimension must be positive, got {d}")));
    }
    if !(rbar >= 0.0) {
        return Err(Error::Domain(format!("radius must be non-negative, got {rbar}")));
    }
    if rbar <= 0.0 || rbar >= 2.0 {
        return Ok(0.0);
    }
    let sin_sq = (rbar * rbar * (2.0 - rbar) * (2.0 + rbar) / 4.0).clamp(0.0, 1.0);
    let ratio = solid_angle_ratio(d)?;
    Ok(ratio * sin_sq.powf((d - 2.0) / 2.0) * rbar)
}

/// Reference evaluation by adaptive quadrature of the spherical integral.
///
/// Absolute accuracy 1e-10 on `0 <= rbar <= 2`. Kept independent of the
/// incomplete-beta route on purpose: this is the verification oracle.
pub fn fci_cdf_quadrature(rbar: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("dimension must be positive, got {d}")));
    }
    if !(0.0..=2.0).contains(&rbar) {
        return Err(Error::Domain(format!(
            "reduced radius must lie in [0, 2], got {rbar}"
        )));
    }
    let theta = (1.0 - rbar * rbar / 2.0).clamp(-1.0, 1.0).acos();
    let integrand = |beta: f64| beta.sin().powf(d - 1.0);
    let integral = adaptive_simpson(&integrand, 0.0, theta, 1e-12, 60);
    Ok(solid_angle_ratio(d)? * integral)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Terminating hypergeometric form for even integer dimensions.
///
/// For even d the series 2F1(1/2, 1 - d/2; 3/2; z) with z = ((rbar^2 - 2)/2)^2
/// terminates, so the closed form
/// `1/2 + (Omega_{d-1} / 2 Omega_d)(rbar^2 - 2) 2F1(...)` can be summed
/// exactly; z is the squared cosine of the opening angle. Retained as a
/// second verification oracle.
pub fn fci_cdf_even_series(rbar: f64, d: u32) -> Result<f64> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::Domain(format!(
            "series form requires a positive even dimension, got {d}"
        )));
    }
    if !(0.0..=2.0).contains(&rbar) {
        return Err(Error::Domain(format!(
            "reduced radius must lie in [0, 2], got {rbar}"
        )));
    }
    let df = f64::from(d);
    let w = rbar * rbar - 2.0;
    let z = w * w / 4.0;
    let terms = d / 2;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..terms {
        sum += term;
        let kf = k as f64;
        term *= (0.5 + kf) * (1.0 - df / 2.0 + kf) / ((1.5 + kf) * (kf + 1.0)) * z;
    }
    Ok(0.5 + 0.5 * solid_angle_ratio(df)? * w * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn solid_angle_ratio_low_dimensions() {
        // Omega_0 = 2, Omega_1 = 2 pi, Omega_2 = 4 pi.
        assert!((solid_angle_ratio(1.0).unwrap() - 1.0 / PI).abs() < 1e-14);
        assert!((solid_angle_ratio(2.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn solid_angle_ratio_large_dimension_is_finite() {
        let v = solid_angle_ratio(300.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        // Gamma recurrence: f(d) f(d+1) = d / (2 pi).
        for &d in &[1.0, 2.5, 10.0, 300.0, 2000.0] {
            let prod = solid_angle_ratio(d).unwrap() * solid_angle_ratio(d + 1.0).unwrap();
            assert!((prod - d / (2.0 * PI)).abs() < 1e-12 * (d / (2.0 * PI)));
        }
        assert!(solid_angle_ratio(0.0).is_err());
        assert!(solid_angle_ratio(-1.0).is_err());
    }

    #[test]
    fn cdf_hemisphere_point() {
        for d in 1..=50 {
            let v = fci_cdf(SQRT_2, f64::from(d)).unwrap();
            assert!((v - 0.5).abs() < 1e-10, "d={d}: {v}");
        }
    }

    #[test]
    fn cdf_endpoints() {
        for &d in &[0.5, 1.0, 3.0, 17.2] {
            assert_eq!(fci_cdf(0.0, d).unwrap(), 0.0);
            assert_eq!(fci_cdf(2.0, d).unwrap(), 1.0);
            assert_eq!(fci_cdf(3.5, d).unwrap(), 1.0);
        }
    }

    #[test]
    fn cdf_closed_forms_low_dimension() {
        // d = 1: arc-length law gives 1/3 at rbar = 1 (theta = pi/3).
        assert!((fci_cdf(1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // d = 2: rho = rbar^2 / 4.
        assert!((fci_cdf(1.0, 2.0).unwrap() - 0.25).abs() < 1e-12);
        for &rbar in &[0.3, 0.9, 1.4, 1.9] {
            let expected = rbar * rbar / 4.0;
            assert!((fci_cdf(rbar, 2.0).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_matches_quadrature_on_grid() {
        for &d in &[1.0, 2.0, 3.0, 6.0, 7.5, 20.0, 100.0] {
            for k in 1..50 {
                let rbar = 2.0 * k as f64 / 50.0;
                let a = fci_cdf(rbar, d).unwrap();
                let b = fci_cdf_quadrature(rbar, d).unwrap();
                assert!((a - b).abs() < 1e-8, "d={d} rbar={rbar}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quadrature_normalization_and_symmetry() {
        assert!((fci_cdf_quadrature(2.0, 7.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((fci_cdf_quadrature(SQRT_2, 13.0).unwrap() - 0.5).abs() < 1e-10);
        let a = fci_cdf_quadrature(0.8, 4.0).unwrap();
        let b = fci_cdf(0.8, 4.0).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn even_series_matches_cdf() {
        for d in [2u32, 4, 6, 8, 10] {
            for k in 0..=40 {
                let rbar = 2.0 * k as f64 / 40.0;
                let series = fci_cdf_even_series(rbar, d).unwrap();
                let beta = fci_cdf(rbar, f64::from(d)).unwrap();
                assert!(
                    (series - beta).abs() < 1e-10,
                    "d={d} rbar={rbar}: {series} vs {beta}"
                );
            }
        }
        assert!(fci_cdf_even_series(1.0, 3).is_err());
    }

    #[test]
    fn cdf_is_valid_distribution() {
        for &d in &[0.5, 1.0, 2.0, 3.0, 7.5, 20.0, 100.0, 1000.0] {
            let mut prev = 0.0;
            for k in 0..=400 {
                let rbar = 2.0 * k as f64 / 400.0;
                let v = fci_cdf(rbar, d).unwrap();
                assert!((0.0..=1.0).contains(&v));
                assert!(v >= prev - 1e-12, "non-monotone at d={d} rbar={rbar}");
                prev = v;
            }
            assert_eq!(fci_cdf(0.0, d).unwrap(), 0.0);
            assert_eq!(fci_cdf(2.0, d).unwrap(), 1.0);
        }
    }

    #[test]
    fn central_slope_grows_with_dimension() {
        let h = 1e-6;
        let mut prev = 0.0;
        let mut d = 2.0;
        while d <= 256.0 {
            let slope = (fci_cdf(SQRT_2 + h, d).unwrap() - fci_cdf(SQRT_2 - h, d).unwrap())
                / (2.0 * h);
            assert!(slope > prev, "slope not increasing at d={d}");
            prev = slope;
            d *= 2.0;
        }
    }

    #[test]
    fn density_matches_finite_difference() {
        let h = 1e-6;
        for &d in &[1.5, 3.0, 12.0] {
            for &rbar in &[0.4, 1.0, SQRT_2, 1.8] {
                let analytic = fci_density(rbar, d).unwrap();
                let numeric = (fci_cdf(rbar + h, d).unwrap() - fci_cdf(rbar - h, d).unwrap())
                    / (2.0 * h);
                assert!(
                    (analytic - numeric).abs() < 1e-5 * analytic.abs().max(1.0),
                    "d={d} rbar={rbar}: {analytic} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn model_value_scales_radius() {
        let params = FciParams::new(7.0, 2.5).unwrap();
        assert!((fci_model_value(SQRT_2 * 2.5, &params).unwrap() - 0.5).abs() < 1e-10);
        let unit = FciParams::new(4.0, 1.0).unwrap();
        assert_eq!(fci_model_value(3.0, &unit).unwrap(), 1.0);
        let d2 = FciParams::new(2.0, 1.0).unwrap();
        assert!((fci_model_value(1.0, &d2).unwrap() - 0.25).abs() < 1e-12);
        assert!(FciParams::new(0.0, 1.0).is_err());
        assert!(FciParams::new(1.0, -2.0).is_err());
        assert!(fci_cdf(-0.1, 3.0).is_err());
        assert!(fci_cdf(1.0, 0.0).is_err());
    }
}
