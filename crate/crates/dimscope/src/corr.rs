//! Empirical correlation integral: the fraction of sample pairs within a
//! cutoff distance, as a function of that cutoff.

use crate::data::{DistanceList, RngHandle};
use crate::error::{Error, Result};

/// Monotone sequence of (distance, cumulative pair fraction) points.
///
/// Built from M sorted pair distances, the k-th point carries the fraction
/// (k-1)/M. Ties are kept as repeated distances with increasing fractions, so
/// datasets with repeated pair distances produce their characteristic ladder
/// patterns instead of collapsed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfCurve {
    radii: Vec<f64>,
    fractions: Vec<f64>,
}

impl EcdfCurve {
    fn new(radii: Vec<f64>, fractions: Vec<f64>) -> Self {
        debug_assert_eq!(radii.len(), fractions.len());
        debug_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(fractions.windows(2).all(|w| w[0] <= w[1]));
        Self { radii, fractions }
    }

    /// Builds a curve from explicit (distance, fraction) points.
    ///
    /// Distances and fractions must both be nondecreasing, with fractions in
    /// [0, 1]. Intended for synthetic curves; measured curves come from
    /// [`empirical_correlation_integral`].
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one point".into()));
        }
        for w in points.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidInput(
                    "curve points must be nondecreasing in r and rho".into(),
                ));
            }
        }
        if points
            .iter()
            .any(|&(r, f)| !r.is_finite() || !(0.0..=1.0).contains(&f))
        {
            return Err(Error::InvalidInput(
                "curve points need finite r and rho in [0, 1]".into(),
            ));
        }
        let (radii, fractions) = points.iter().copied().unzip();
        Ok(Self::new(radii, fractions))
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.fractions.iter().copied())
    }

    /// Step evaluation: the fraction of stored distances that are <= `r`.
    ///
    /// Counting is non-strict so tied distances move together; `r` at or
    /// beyond the largest distance evaluates to 1.
    pub fn evaluate(&self, r: f64) -> f64 {
        let idx = self.radii.partition_point(|&rk| rk <= r);
        if idx == self.radii.len() {
            1.0
        } else {
            self.fractions[idx]
        }
    }

    /// Kolmogorov-Smirnov style sup-norm distance to a reference CDF.
    pub fn sup_distance_to<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut sup = 0.0f64;
        for (k, &r) in self.radii.iter().enumerate() {
            let f = cdf(r);
            let below = self.fractions[k];
            let above = self.evaluate(r);
            sup = sup.max((f - below).abs()).max((above - f).abs());
        }
        sup
    }
}

/// Builds the empirical correlation integral from sorted pair distances.
pub fn empirical_correlation_integral(dists: &DistanceList) -> Result<EcdfCurve> {
    if dists.is_empty() {
        return Err(Error::InvalidInput("empty distance list".into()));
    }
    let m = dists.len() as f64;
    let radii = dists.values().to_vec();
    let fractions = (0..dists.len()).map(|k| k as f64 / m).collect();
    Ok(EcdfCurve::new(radii, fractions))
}

/// Keeps a uniformly random subset of at most `max_points` curve points,
/// re-sorted by distance. Curves at or below the budget pass through intact.
pub fn subsample_curve(
    curve: &EcdfCurve,
    max_points: usize,
    rng: &RngHandle,
) -> Result<EcdfCurve> {
    if max_points < 2 {
        return Err(Error::InvalidInput(
            "curve subsampling needs max_points >= 2".into(),
        ));
    }
    if curve.len() <= max_points {
        return Ok(curve.clone());
    }
    let mut generator = rng.rng();
    let mut keep = rand::seq::index::sample(&mut generator, curve.len(), max_points).into_vec();
    keep.sort_unstable();
    let radii = keep.iter().map(|&i| curve.radii[i]).collect();
    let fractions = keep.iter().map(|&i| curve.fractions[i]).collect();
    Ok(EcdfCurve::new(radii, fractions))
}
