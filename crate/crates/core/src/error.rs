use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coefficient spaces do not match: {0}")]
    CoefficientMismatch(String),

    #[error("constant term must be {expected}, found deviation {deviation:e}")]
    ConstantTerm { expected: f64, deviation: f64 },

    #[error("exponent has zero denominator")]
    ZeroDenominator,

    #[error("implicit solve degenerate at order {order}: linearization {linearization:e}")]
    DegenerateImplicit { order: usize, linearization: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("near-singular division: |divisor| = {value:e} at node {node}")]
    NearSingular { node: usize, value: f64 },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("quadrature not converged: achieved {achieved:e}, wanted {wanted:e}")]
    QuadratureNotConverged { achieved: f64, wanted: f64 },

    #[error("{name} = {value} is outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    #[error("iterate left the ball: sup|v| = {norm} > m = {radius}")]
    OutOfBall { norm: f64, radius: f64 },

    #[error("fixed point not converged after {iterations} iterations, last step {last_step:e}")]
    NotConverged { iterations: usize, last_step: f64 },

    #[error("negative radicand {0:e} in phi")]
    NegativeRadicand(f64),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_domain(name: &'static str, value: f64, domain: impl Into<String>) -> Error {
    Error::OutOfDomain {
        name,
        value,
        domain: domain.into(),
    }
}
