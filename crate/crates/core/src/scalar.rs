//! Scalar abstraction for the probability core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type usable for probabilities and information measures.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Slack allowed on a probability vector summing to one.
    fn validity_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Slack allowed on the total mass of a joint table.
    fn joint_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(256.0))
    }

    /// Masses below this value are treated as exact zeros inside logarithms.
    fn log_floor() -> Self {
        Self::lit(1e-15).max(Self::min_positive_value())
    }
}

impl Real for f32 {}
impl Real for f64 {}
