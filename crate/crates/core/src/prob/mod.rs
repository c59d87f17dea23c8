//! Finite-alphabet probability primitives and information measures.

mod alphabet;
mod dist;
mod info;
mod joint;

pub use alphabet::{flat_index, unflatten, Alphabet};
pub use dist::{CondKernel, ProbDist};
pub use info::{binary_entropy, entropy, entropy_of, neg_xlog2x};
pub use joint::{compose, Axis, Factor, JointTable};
