use alloc::string::String;
use core::fmt;

/// Failure categories shared across the crate.
///
/// The variants map one-to-one onto the command line exit codes: validation
/// problems, exhausted resource guards and numeric breakdowns are kept apart so
/// callers can react differently to each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input violates a documented precondition or schema.
    Validation(String),
    /// A number does not decode to a valid machine description.
    NotAMachine(String),
    /// Exact integer arithmetic exceeded the fixed-width coefficients.
    ArithmeticCapacity,
    /// An enumeration guard (configurations, support size, net size) was hit.
    Resource(String),
    /// An iterative numeric routine failed to converge or was ill-conditioned.
    Numeric(String),
    /// Amplitude or gate not representable in the exact ring.
    UnsupportedAmplitude(String),
    /// Requested a measurement branch that has zero probability.
    InvalidBranch,
    /// Target precision is below what the supplied target can justify.
    Precision(String),
    /// A halted branch drifted onto a configuration that a running branch
    /// halts into in the same step, so the step is not an isometry there.
    HaltCollision(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::NotAMachine(m) => write!(f, "not a machine: {m}"),
            Error::ArithmeticCapacity => f.write_str("exact arithmetic capacity exceeded"),
            Error::Resource(m) => write!(f, "resource guard exceeded: {m}"),
            Error::Numeric(m) => write!(f, "numeric failure: {m}"),
            Error::UnsupportedAmplitude(m) => write!(f, "unsupported amplitude: {m}"),
            Error::InvalidBranch => f.write_str("requested measurement branch has zero probability"),
            Error::Precision(m) => write!(f, "precision error: {m}"),
            Error::HaltCollision(m) => write!(f, "halted branches collide: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
