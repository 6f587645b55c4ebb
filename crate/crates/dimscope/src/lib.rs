//! Intrinsic dimension estimation from the full correlation integral.
//!
//! The estimator fits the exact pair-distance law of a uniformly sampled
//! hypersphere to the whole empirical correlation integral of a dataset,
//! instead of the small-radius tail classical correlation-dimension methods
//! rely on. Because the informative part of the curve sits at finite radius,
//! the fit stays usable when neighborhoods are severely undersampled, up to
//! and including fewer samples than dimensions.
//!
//! The crate provides:
//!
//! - the global estimator ([`estimate_id_global`]) and the underlying model
//!   and fit ([`model`], [`fit_fci`]);
//! - multiscale local profiles with a minimum-plateau summary
//!   ([`multiscale`]);
//! - classical baselines: correlation-dimension slope, global PCA criteria,
//!   and multiscale PCA spectra ([`baselines`]);
//! - deterministic seeded generators for benchmark manifolds ([`datasets`]);
//! - CSV / binary dataset formats and plot-ready exports ([`io`]), plus the
//!   `dimscope` command line front end ([`cli`]).
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod baselines;
pub mod cli;
pub mod corr;
pub mod data;
pub mod datasets;
pub mod error;
pub mod estimator;
pub mod io;
pub mod model;
pub mod multiscale;
pub mod special;

pub use crate::corr::{empirical_correlation_integral, subsample_curve, EcdfCurve};
pub use crate::data::{
    center_and_project, distances_to, pairwise_distances, DataSet, DistanceList, RngHandle,
};
pub use crate::error::{Error, Result};
pub use crate::estimator::{
    estimate_id_global, fit_fci, fit_fci_with, EstimatorConfig, FciFit, FitOptions, IdEstimate,
};
pub use crate::model::{
    fci_cdf, fci_cdf_even_series, fci_cdf_quadrature, fci_density, fci_model_value,
    solid_angle_ratio, FciParams,
};
pub use crate::multiscale::{
    auto_knn_grid, local_id, multiscale_estimate, multiscale_with_centers, neighborhood,
    sample_centers, scale_profile, MultiscaleConfig, MultiscaleResult, Scale, ScaleEntry,
    ScaleProfile,
};
