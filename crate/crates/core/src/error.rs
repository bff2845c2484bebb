use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Parameters or arguments violate a documented precondition.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The negative-energy fraction of a zero field is undefined.
    #[error("undefined fraction: field has zero norm")]
    UndefinedFraction,

    #[error("tail window too far out: |psi| underflows at x = {x}")]
    WindowTooFar { x: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("state is not normalized: norm^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    /// The jump process sits on a configuration where the wave function vanishes.
    #[error("stranded configuration {config:#x} at t = {time}: |psi(q)|^2 = 0")]
    Stranded { config: u64, time: f64 },

    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
}

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
