use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("adaptive quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NoConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("semi-infinite tail bound not met before upper limit {upper:e} (partial {partial:e}, tail {tail:e})")]
    TailNotConverged { partial: f64, tail: f64, upper: f64 },

    #[error("{0}")]
    Phase(String),

    #[error("Z_{n} is a point mass at {at} m; use the atom representation instead of a pointwise density")]
    AtomicDistribution { n: u32, at: f64 },

    #[error("bearing of a zero net displacement is undefined")]
    UndefinedBearing,

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("path-loss exponent alpha = {alpha} must exceed 2; the aggregate interference integral in the average-rate expression diverges otherwise")]
    Divergence { alpha: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
