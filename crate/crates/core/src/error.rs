use thiserror::Error;

/// Errors raised by the geometry kernels and the averaging pipeline.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("rank deficient: smallest singular value {smallest:e} vs largest {largest:e}")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subspace is the whole space; its complement is trivial")]
    FullSpace,

    #[error("spectral gap {gap:e} at 1/2 is below threshold {threshold:e}")]
    SpectralGapTooSmall { gap: f64, threshold: f64 },

    #[error("invalid weights: {0}")]
    WeightError(String),

    #[error("beyond injectivity radius: distance {distance} >= {limit}")]
    BeyondInjectivity { distance: f64, limit: f64 },

    #[error("nearest point is not unique: rho = {rho}, runner-up = {runner_up}")]
    NotUnique { rho: f64, runner_up: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the tube: |w| = {norm} exceeds {limit}")]
    LeftTube { norm: f64, limit: f64 },

    #[error("slice jacobian not positive: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("no sign change of the distance difference within |t| <= {search_radius}")]
    NoSignChange { search_radius: f64 },

    #[error("family spread epsilon = {epsilon} is not below the limit {limit}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },

    #[error("slice {vertex} failed: {source}")]
    SliceFailed {
        vertex: usize,
        #[source]
        source: Box<GeomError>,
    },

    #[error("morph step at t = {time} failed: {source}")]
    MorphFailed {
        time: f64,
        #[source]
        source: Box<GeomError>,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
