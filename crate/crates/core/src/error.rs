//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid axis {axis}: min {min} must be strictly below max {max}")]
    BadAxis { axis: usize, min: f64, max: f64 },
    #[error("grid axis {axis}: {points} points, need at least 8")]
    TooFewPoints { axis: usize, points: usize },
    #[error("packet width {sigma} under-resolved: need at least 3 grid spacings ({min_sigma})")]
    WidthUnderResolved { sigma: f64, min_sigma: f64 },
    #[error("center {center:?} lies outside the grid extent")]
    CenterOutOfBounds { center: Vec<f64> },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("state norm {norm} below 1e-12; refusing to normalize a zero vector")]
    ZeroVector { norm: f64 },
    #[error("split-step stability bound violated: dt = {dt}, largest admissible dt = {dt_max}")]
    StabilityBound { dt: f64, dt_max: f64 },
    #[error("non-finite amplitude detected during propagation")]
    NanDetected,
    #[error("density {density:.3e} at {q:?} is below the node threshold {threshold:.3e}")]
    NodeProximity {
        q: Vec<f64>,
        density: f64,
        threshold: f64,
    },
    #[error("position {q:?} lies outside the domain")]
    OutOfBounds { q: Vec<f64> },
    #[error("position {q:?} is within the exclusion radius {radius} of the singular point {point:?}")]
    SingularPointProximity {
        q: Vec<f64>,
        point: Vec<f64>,
        radius: f64,
    },
    #[error("post-selected state is orthogonal to the evolved preparation (|overlap| = {overlap:.3e})")]
    OrthogonalPostselection { overlap: f64 },
    #[error("pointer grid too narrow: lump at {lump_center} needs {required} of clearance, grid half-width is {half_width}")]
    PointerGridTooNarrow {
        lump_center: f64,
        required: f64,
        half_width: f64,
    },
    #[error("stochastic integration requires a seed")]
    SeedRequired,
    #[error("operation requires a deterministic guidance law")]
    DeterministicLawRequired,
    #[error("trajectory truncated at t = {time}: {reason}")]
    FlowTruncated { time: f64, reason: String },
    #[error("ensemble push truncated {truncated} of {total} trajectories ({rate:.2}% > 1%)")]
    TruncationRate {
        truncated: usize,
        total: usize,
        rate: f64,
    },
    #[error("matrix is not Hermitian: max |A - A^H| entry = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("requested time {t} outside the recorded history [{t0}, {t1}]")]
    OutsideHistory { t: f64, t0: f64, t1: f64 },
    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
