//! Validated numerics for periodic localized traveling waves of the
//! two-dimensional suspension bridge equation.

pub mod bounds;
pub mod coeff;
pub mod dft;
pub mod interval;
pub mod linalg;
pub mod power_series;
pub mod problem;
pub mod runner;
pub mod scalar;
pub mod solver;

pub use coeff::{CoeffGrid, IndexPair, Weights};
pub use interval::{ComplexInterval, Interval, IntervalError};
pub use problem::{OperatorA, ProblemParams, TruncationSet};
pub use scalar::Scalar;

pub type Interval64 = Interval<f64>;
pub type Interval32 = Interval<f32>;
pub type ComplexInterval64 = ComplexInterval<f64>;
pub type CoeffGrid64 = CoeffGrid<f64>;
pub type IntervalGrid64 = CoeffGrid<Interval<f64>>;
