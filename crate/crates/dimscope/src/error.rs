//! Error type shared by all estimation pipelines and I/O routines.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A dataset row contains a NaN or infinite coordinate.
    #[error("invalid input: non-finite entry in row {row}")]
    NonFiniteEntry { row: usize },

    /// A sample coincides with the center of mass and cannot be projected
    /// onto the unit sphere.
    #[error("degenerate sample: row {row} coincides with the center of mass")]
    DegenerateSample { row: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The empirical curve does not constrain a two-parameter fit.
    #[error("unfittable curve: {0}")]
    UnfittableCurve(String),

    /// Every (center, scale) pair of a multiscale sweep was unreliable.
    #[error("no reliable scale: every local estimate had too few neighbors or a failed fit")]
    NoReliableScale,

    #[error("degenerate spectrum: all eigenvalues are zero")]
    DegenerateSpectrum,

    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
