//! Exact truncated series in one and two variables.
//!
//! Every series carries its window. Below the lower bound coefficients are
//! known to vanish; above the upper bound they are unknown. Operations
//! shrink windows to the largest range on which their output is exact, and
//! comparisons only ever look at the range both operands know.

mod bi;
mod uni;

use thiserror::Error;

pub use bi::BiSeries;
pub use uni::UniSeries;

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("incompatible windows")]
    IncompatibleWindows,
    #[error("non-invertible series")]
    NonInvertible,
    #[error("log of non-unit")]
    LogOfNonUnit,
    #[error("exp needs a series without constant or negative terms")]
    ExpOfNonPositive,
    #[error("requested window is empty")]
    EmptyWindow,
}

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}
