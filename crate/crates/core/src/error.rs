use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid queue parameters: {0}")]
    InvalidParams(String),

    #[error("premium fraction {0} outside [0, 1]")]
    InvalidFraction(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid cost distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("wrong sampling index for mechanism `{mechanism}`: expected {expected}")]
    WrongIndex {
        mechanism: &'static str,
        expected: &'static str,
    },

    #[error("invalid CDF: {0}")]
    InvalidCdf(String),

    #[error("profile is not an equilibrium: {0}")]
    NotAnEquilibrium(String),

    #[error(
        "quadrature did not converge after {evaluations} evaluations: \
         value {value}, error estimate {abs_error_estimate:e}"
    )]
    NonConvergence {
        value: f64,
        abs_error_estimate: f64,
        evaluations: usize,
    },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
