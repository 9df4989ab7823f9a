use core::fmt;

/// Failures of the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Adaptive quadrature did not reach tolerance within the subdivision budget.
    QuadratureFailure { lower: f64, upper: f64, error_estimate: f64 },
    /// A band with `S - s` below `1e-12`, or with `S <= s`.
    DegenerateBand { reorder: f64, order_up_to: f64 },
    /// `A` outside the open interval `(A_low, A_high)`.
    OutOfRange { value: f64, low: f64, high: f64 },
    /// A bracketing search found no sign change.
    NoBracket { what: &'static str, lo: f64, hi: f64 },
    /// An iteration budget ran out.
    ConvergenceFailure { what: &'static str, iterations: usize },
    /// The generalized policy quantities only exist when `A1* > A2*`.
    RegimeError { a1: f64, a2: f64 },
    /// Malformed input (non-increasing threshold grid, bad policy levels, ...).
    InvalidInput(&'static str),
    /// A structural property of the solution failed numerically.
    Inconsistent(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::QuadratureFailure { lower, upper, error_estimate } => {
                write!(f, "quadrature on [{lower}, {upper}] did not converge (error estimate {error_estimate:e})")
            }
            Error::DegenerateBand { reorder, order_up_to } => {
                write!(f, "degenerate band: s = {reorder}, S = {order_up_to}")
            }
            Error::OutOfRange { value, low, high } => {
                write!(f, "A = {value} outside ({low}, {high})")
            }
            Error::NoBracket { what, lo, hi } => {
                write!(f, "no sign change for {what} on [{lo}, {hi}]")
            }
            Error::ConvergenceFailure { what, iterations } => {
                write!(f, "{what} did not converge in {iterations} iterations")
            }
            Error::RegimeError { a1, a2 } => write!(f, "generalized policy undefined: A1* = {a1} <= A2* = {a2}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Inconsistent(msg) => write!(f, "inconsistent solution: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
