use core::fmt;

/// Errors raised by the solvers and oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A primitive parameter violates its domain.
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
    },
    /// The requested operation needs a strictly interior banker weight.
    BoundaryWeight { alpha_tilde: f64 },
    /// The best-response coefficient is not positive.
    DegenerateBestResponse { coefficient: f64 },
    /// A partition with `p` cells has a nonpositive first cell.
    InfeasiblePartition { p: usize, max: Option<usize> },
    /// Cutoffs do not describe a partition of `[-phi1, phi1]`.
    MalformedPartition(&'static str),
    /// The operation is only defined for full-revelation communication.
    RequiresFullRevelation,
    /// A scalar search ended on the edge of its bracket.
    BracketMiss { lo: f64, hi: f64, argmax: f64 },
    /// An objective or bracket produced a non-finite value.
    NonFinite { at: f64 },
    /// The derivative check after a numerical search failed.
    OracleMismatch { derivative: f64 },
    /// The profile does not match any kind with a closed-form report.
    UnknownProfileKind,
    /// The case is outside the setting the routine is defined for.
    Unsupported(&'static str),
    /// A discounted stream is truncated before the tail bound.
    HorizonTooShort { horizon: usize, required: usize },
    /// No sign change of the estimated deviation gain inside the bracket.
    NoSignChange { lo: f64, hi: f64 },
    /// A comparative-statics dimension name was not recognised.
    InvalidDimension,
    /// A comparative-statics grid entry is invalid for its dimension.
    InvalidGridValue { index: usize, value: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, constraint: &'static str) -> Self {
        Error::InvalidParameter { name, constraint }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, constraint } => {
                write!(f, "{name} must {constraint}")
            }
            Error::BoundaryWeight { alpha_tilde } => {
                write!(f, "banker weight {alpha_tilde} must lie strictly inside (0,1)")
            }
            Error::DegenerateBestResponse { coefficient } => {
                write!(f, "best-response coefficient {coefficient} is not positive")
            }
            Error::InfeasiblePartition { p, max } => match max {
                Some(m) => write!(f, "infeasible partition count {p} (maximum is {m})"),
                None => write!(f, "infeasible partition count {p}"),
            },
            Error::MalformedPartition(why) => write!(f, "malformed partition: {why}"),
            Error::RequiresFullRevelation => {
                write!(f, "operation requires full-revelation communication")
            }
            Error::BracketMiss { lo, hi, argmax } => {
                write!(f, "argmax {argmax} sits on the boundary of [{lo}, {hi}]")
            }
            Error::NonFinite { at } => write!(f, "non-finite objective value at {at}"),
            Error::OracleMismatch { derivative } => {
                write!(f, "derivative {derivative} at the numerical argmax is not zero")
            }
            Error::UnknownProfileKind => write!(f, "unknown profile kind"),
            Error::Unsupported(why) => write!(f, "unsupported case: {why}"),
            Error::HorizonTooShort { horizon, required } => {
                write!(f, "horizon {horizon} too short for the tail bound (need {required})")
            }
            Error::NoSignChange { lo, hi } => {
                write!(f, "deviation gain does not change sign on [{lo}, {hi}]")
            }
            Error::InvalidDimension => {
                write!(f, "dimension must be one of alpha, beta, N, phi1, phi2")
            }
            Error::InvalidGridValue { index, value } => {
                write!(f, "grid value {value} at index {index} is invalid for the dimension")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
