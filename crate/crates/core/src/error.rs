use thiserror::Error;

/// Errors raised by the bound computations, models and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be nonnegative, got {value}")]
    NegativeArgument { what: &'static str, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("density curve {which} integrates to {mass}, expected 1")]
    NotNormalized { which: usize, mass: f64 },

    #[error("point {theta:?} lies outside the flock domain at t = {t}")]
    OutsideDomain { theta: Vec<f64>, t: f64 },

    #[error("singular transport Jacobian at {theta:?} (t = {t})")]
    SingularJacobian { theta: Vec<f64>, t: f64 },

    #[error("empty measure discretization at t = {0}")]
    EmptyDiscretization(f64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("importance weights vanished under both proposals for y = {0:?}")]
    ZeroWeights(Vec<f64>),

    #[error("estimator failed at trial {trial}: {source}")]
    Estimator {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_nonnegative(what: &'static str, value: f64) -> Result<()> {
    if value.is_nan() {
        return Err(Error::NonFinite(what));
    }
    if value < 0.0 {
        return Err(Error::NegativeArgument { what, value });
    }
    Ok(())
}
