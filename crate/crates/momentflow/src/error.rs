use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration is odd: moment vanishes by sign symmetry")]
    OddConfiguration,
    #[error("configuration space has about {estimate} states, above the guard {guard}")]
    SpaceTooLarge { estimate: f64, guard: usize },
    #[error("negative coefficient c[{i}][{j}] = {value}")]
    NegativeCoefficient { i: usize, j: usize, value: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("boundary evaluation requires free convolution")]
    BoundaryEvaluation,
    #[error("fixed point did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("outside regular spectrum: Im m_fc = {0:e}")]
    OutsideRegularSpectrum(f64),
    #[error("eigenvalue collision: gap {gap:e} at s = {time}")]
    EigenvalueCollision { gap: f64, time: f64 },
    #[error("degenerate pairing after {0} attempts")]
    DegeneratePairing(usize),
    #[error("variance profile rejected: {0}")]
    InvalidProfile(String),
    #[error("stability bound violated: use at least {suggested} steps")]
    StabilityBound { suggested: usize },
    #[error("neighborhood has {0} states, too large for a dense solve")]
    NeighborhoodTooLarge(usize),
    #[error("vector is not unit length (norm {0})")]
    NonUnitVector(f64),
    #[error("density integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
