use thiserror::Error;

/// Errors raised by evaluators, integrators and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("u = {value} is not positive but the exponent {exponent} is fractional")]
    NonPositiveU { value: f64, exponent: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("inadmissible constants: {0}")]
    InadmissibleConstants(String),

    #[error("generator {0} acts on the potential v but no v was supplied")]
    MissingPotential(String),

    #[error("singular point of the reduced ODE at z = {z}")]
    SingularPoint { z: f64 },

    #[error("w = {w} is not positive in a fractional power")]
    NonPositiveW { w: f64 },

    #[error("integration failed: {0}")]
    StepFailure(String),

    #[error("generator {0} has no closed-form flow")]
    FlowUnavailable(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("field is not a verified solution: {0}")]
    UnverifiedField(String),

    #[error("positivity lost at x = {x}, t = {t} (u = {u})")]
    PositivityLoss { x: f64, t: f64, u: f64 },

    #[error("unknown entry `{0}`")]
    UnknownEntry(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
