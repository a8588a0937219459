//! Outward-rounded real and complex interval arithmetic.

pub mod complex;
pub mod decimal;
pub mod elementary;
mod real;
pub mod rounding;

pub use complex::ComplexInterval;
pub use real::Interval;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("empty interval: lower endpoint {lo} exceeds upper endpoint {hi}")]
    Empty { lo: f64, hi: f64 },
    #[error("NaN endpoint")]
    NaN,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("cannot parse interval from {0:?}")]
    Parse(String),
}
