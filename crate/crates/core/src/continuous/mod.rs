//! Lower bounds for the continuous-alphabet examples.

mod bounds;
mod mixture;

pub use bounds::{awgn_capacity, dirty_paper_lower, fading_lower, DirtyPaperParams, FadingParams, POWER_GRID};
pub use mixture::{gaussian_entropy, mixture_differential_entropy, GaussianMixture, ENTROPY_TOL};
