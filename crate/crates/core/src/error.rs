use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument is outside its valid range.
    InvalidArgument(String),
    /// A register would exceed the simulator's qubit cap.
    Capacity { requested: usize, max: usize },
    /// A model (MDP or map) violates a structural requirement.
    Model(String),
    /// Value iteration did not reach the tolerance.
    Divergence { sweeps: usize, residual: f64 },
    /// An operation was called in a state where it is not allowed.
    Usage(String),
    /// A map document could not be parsed.
    Parse { line: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Capacity { requested, max } => {
                write!(f, "{requested} qubits requested, simulator cap is {max}")
            }
            Error::Model(msg) => write!(f, "invalid model: {msg}"),
            Error::Divergence { sweeps, residual } => write!(
                f,
                "value iteration did not converge after {sweeps} sweeps (residual {residual:e})"
            ),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Parse { line, message } => write!(f, "map line {line}: {message}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
