use thiserror::Error;

use crate::geodesics::GeodesicPath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} grid points, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// C1 vanishes at this total mass; the metric degenerates there.
    #[error("degenerate coefficient: C1({mass}) = {c1:e}")]
    Degenerate { mass: f64, c1: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unsupported preset for this operation: {0}")]
    UnsupportedPreset(String),

    #[error("quadrature did not converge: {message} (partial values: {partial:?})")]
    Quadrature { message: String, partial: Vec<f64> },

    #[error("tangency violated: <phi, dphi> = {violation:e}")]
    Tangency { violation: f64 },

    /// The trajectory left the coordinate domain in finite time.
    #[error("geodesic hit the domain boundary at t = {time}")]
    BoundaryHit {
        time: f64,
        partial: Box<GeodesicPath>,
    },

    #[error("no connecting geodesic found (best endpoint mismatch {best_mismatch:e})")]
    NoConnection {
        best_mismatch: f64,
        best: Option<Box<GeodesicPath>>,
    },

    #[error("revolution profile is invalid on the whole requested range")]
    EmptyProfile,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
