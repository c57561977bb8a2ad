use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation length {truncation} does not contain the oscillator well (need >= {required})")]
    TruncationTooSmall { truncation: f64, required: f64 },

    #[error("eigenvalue index {index} too large for a grid of {grid_points} points (max {max})")]
    IndexTooLarge {
        index: usize,
        grid_points: usize,
        max: usize,
    },

    #[error("minimizer {location} sits on the search window boundary [{lo}, {hi}]; widen the window")]
    WindowBoundary { location: f64, lo: f64, hi: f64 },

    #[error("discretization failure: {0}")]
    Discretization(String),

    #[error("mode range {mode_range} insufficient: extreme mode has eigenvalue {lowest} <= threshold {threshold}; enlarge and retry")]
    ModeRangeInsufficient {
        mode_range: i64,
        lowest: f64,
        threshold: f64,
    },

    #[error("mesh too coarse: estimated error {estimate:.3e} exceeds {limit:.3e}; refine to mesh size <= {hint:.4}")]
    MeshTooCoarse { estimate: f64, limit: f64, hint: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("mesh/field mismatch: {0}")]
    FieldMismatch(String),

    #[error("factorization breakdown at shift {shift} after {attempts} attempts")]
    FactorizationBreakdown { shift: f64, attempts: usize },

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("sublevel set extends beyond tabulated spectrum: {0}")]
    SpectrumTooNarrow(String),

    #[error("too many eigenvalues requested: {0}")]
    CapacityExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
