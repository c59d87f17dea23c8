//! Constrained maximization of the capacity objectives.

mod ba;
mod linalg;
mod oracle;
mod project;
mod strategies;
mod sweep;
mod thm1;
mod thm2;

pub use ba::{blahut_arimoto_constrained, capacity_cost_combined, CostedChannel};
pub use oracle::grid_oracle_thm1;
pub use project::{project_simplex, Polytope};
pub use strategies::{enumerate_strategies, solve_thm3, solve_thm4, Strategy};
pub use sweep::{
    cutoff_point, linear_grid, sweep, sweep_with, time_sharing_baseline, upper_concave_envelope,
    SweepCurve, SHAPE_TOL,
};
pub use thm1::{input_given_state, solve_thm1, thm1_joint, thm1_value};
pub use thm2::solve_thm2_lower;

use serde::Serialize;

use crate::error::Result;
use crate::model::ProbingModel;

/// How a result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Local optimality certified for a concave problem.
    Converged,
    /// Best of several starts on a non-concave landscape.
    MultistartBest,
    /// Exhaustive grid evaluation.
    Oracle,
    /// Closed form or interpolation between solved points.
    Interpolated,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MultistartBest => "multistart-best",
            Status::Oracle => "oracle",
            Status::Interpolated => "interpolated",
        })
    }
}

/// One support point of a Shannon-strategy input law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedStrategy {
    pub weight: f64,
    pub action: usize,
    /// Input chosen for each `s_e`; `None` where `s_e` cannot occur.
    pub inputs: Vec<Option<usize>>,
}

/// Optimizing distribution parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Argmax {
    /// `P_A` and `P_{X|Se,A}` with rows ordered by `(se, a)`, `se` outer.
    Thm1 { pa: Vec<f64>, px: Vec<Vec<f64>> },
    /// `P_A`, `P_{U|Se,A}` rows ordered by `(se, a)`, and `f[u][se]`.
    Thm2 {
        pa: Vec<f64>,
        pu: Vec<Vec<f64>>,
        f: Vec<Vec<usize>>,
    },
    /// Strategy mixture (causal encoder).
    Thm3 { support: Vec<WeightedStrategy> },
    /// `P_{A_d}` and one strategy mixture per decoder action.
    Thm4 {
        pad: Vec<f64>,
        support: Vec<Vec<WeightedStrategy>>,
    },
    /// Input law of a single channel.
    Input { p: Vec<f64> },
    /// Power allocation of a continuous bound.
    Powers { names: Vec<String>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub value: f64,
    pub argmax: Argmax,
    pub achieved_cost: f64,
    pub trace: Vec<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Target accuracy of the returned value, in bits.
    pub tol: f64,
    pub multistarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Largest strategy alphabet (or subset count) enumerated.
    pub strategy_cap: usize,
    /// Restricts `|U|`; `None` uses the theorem's bound (capped at 4 for the
    /// non-causal solver).
    pub u_cap: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            multistarts: 32,
            seed: 0,
            max_iter: 20_000,
            strategy_cap: 4096,
            u_cap: None,
        }
    }
}

/// A solver usable by [`sweep`].
pub trait Solver: Sync {
    fn solve(&self, m: &ProbingModel, gamma: f64) -> Result<SolveResult>;
}

impl<F> Solver for F
where
    F: Fn(&ProbingModel, f64) -> Result<SolveResult> + Sync,
{
    fn solve(&self, m: &ProbingModel, gamma: f64) -> Result<SolveResult> {
        self(m, gamma)
    }
}
