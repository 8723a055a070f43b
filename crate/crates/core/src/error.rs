use thiserror::Error;

/// Errors raised by the model, solver and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model parameter violates its invariants.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two vectors that must share the antenna count do not.
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// Requested output amplitude exceeds what the amplifier can produce.
    #[error("output amplitude {zbar} exceeds saturated output {z_max}")]
    InfeasibleAmplitude { zbar: f64, z_max: f64 },

    /// A derivative was requested at a point where it is unbounded.
    #[error("derivative is singular at antenna {index} (output amplitude at saturation)")]
    SingularDerivative { index: usize },

    /// The optimization problem handed to the solver violates its invariants.
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),

    /// The solver hit its iteration cap.
    #[error("solver did not converge: {0}")]
    NotConverged(String),

    /// Invalid experiment or channel configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
