use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// |θ| beyond [`crate::THETA_MAX`]; exponentials leave the double range.
    #[error("|theta| = {theta} exceeds the stable range (max {max})")]
    OverflowGuard { theta: f64, max: f64 },

    #[error("coordinate {value} lies on the boundary of (0,1)")]
    BoundaryValue { value: f64 },

    #[error("sample of size {n} is too small (need at least {min})")]
    SampleTooSmall { n: usize, min: usize },

    #[error("all observations in the sample are identical")]
    DegenerateSample,

    #[error("quadrature did not converge: estimate {estimate}, error {error:e} after {nodes} nodes")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        nodes: usize,
    },

    /// No sign change of the normal equation inside the admissible range.
    /// `boundary_estimate` is the endpoint the search ran into.
    #[error("no sign change of H(theta) within the admissible range; boundary estimate {boundary_estimate}")]
    NoBracket { boundary_estimate: f64 },

    #[error("sample statistic {statistic} is outside the range of the moment map; boundary estimate {boundary_estimate}")]
    MomentOutOfRange {
        statistic: f64,
        boundary_estimate: f64,
    },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
