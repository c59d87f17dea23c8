//! Capacity of channels whose state is observed through costly probing.

pub mod cli;
pub mod continuous;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod solver;
pub mod prob;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ProbDist = prob::ProbDist<f64>;
pub type CondKernel = prob::CondKernel<f64>;
pub type JointTable = prob::JointTable<f64>;
pub type Factor = prob::Factor<f64>;
pub use prob::{Alphabet, Axis};
