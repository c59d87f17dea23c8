//! Budget sweeps and curve post-processing.

use rayon::prelude::*;
use serde::Serialize;

use super::{Argmax, SolveResult, Solver, Status};
use crate::error::{Error, Result};
use crate::model::ProbingModel;

/// Tolerance used for the shape flags.
pub const SHAPE_TOL: f64 = 2e-3;

/// Solved values over a grid of budgets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub gammas: Vec<f64>,
    /// Bits; `NaN` where the point failed.
    pub values: Vec<f64>,
    pub costs: Vec<f64>,
    pub statuses: Vec<Option<Status>>,
    pub argmaxes: Vec<Option<Argmax>>,
    pub errors: Vec<Option<String>>,
    pub monotone: bool,
    pub concave: bool,
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn check_grid(gammas: &[f64]) -> Result<()> {
    if gammas.iter().any(|g| !g.is_finite()) || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("budget grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn is_monotone(values: &[f64], tol: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    for &v in values {
        if v.is_nan() || v < best - tol {
            return false;
        }
        best = best.max(v);
    }
    true
}

fn is_concave(gammas: &[f64], values: &[f64], tol: f64) -> bool {
    if values.iter().any(|v| v.is_nan()) {
        return false;
    }
    (1..values.len().saturating_sub(1)).all(|i| {
        let (g0, g1, g2) = (gammas[i - 1], gammas[i], gammas[i + 1]);
        let t = (g1 - g0) / (g2 - g0);
        values[i] >= (1.0 - t) * values[i - 1] + t * values[i + 1] - tol
    })
}

impl SweepCurve {
    fn assemble(gammas: Vec<f64>, results: Vec<Result<SolveResult>>) -> Self {
        let n = gammas.len();
        let mut curve = SweepCurve {
            gammas,
            values: Vec::with_capacity(n),
            costs: Vec::with_capacity(n),
            statuses: Vec::with_capacity(n),
            argmaxes: Vec::with_capacity(n),
            errors: Vec::with_capacity(n),
            monotone: false,
            concave: false,
        };
        for r in results {
            match r {
                Ok(r) => {
                    curve.values.push(r.value);
                    curve.costs.push(r.achieved_cost);
                    curve.statuses.push(Some(r.status));
                    curve.argmaxes.push(Some(r.argmax));
                    curve.errors.push(None);
                }
                Err(e) => {
                    curve.values.push(f64::NAN);
                    curve.costs.push(f64::NAN);
                    curve.statuses.push(None);
                    curve.argmaxes.push(None);
                    curve.errors.push(Some(e.to_string()));
                }
            }
        }
        curve.refresh_flags();
        curve
    }

    /// Curve from precomputed values, e.g. closed forms; costs equal budgets.
    pub fn from_points(gammas: Vec<f64>, values: Vec<f64>, status: Status) -> Result<Self> {
        check_grid(&gammas)?;
        if gammas.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} budgets but {} values",
                gammas.len(),
                values.len()
            )));
        }
        let n = gammas.len();
        let mut curve = SweepCurve {
            costs: gammas.clone(),
            gammas,
            values,
            statuses: vec![Some(status); n],
            argmaxes: vec![None; n],
            errors: vec![None; n],
            monotone: false,
            concave: false,
        };
        curve.refresh_flags();
        Ok(curve)
    }

    pub fn refresh_flags(&mut self) {
        self.monotone = is_monotone(&self.values, SHAPE_TOL);
        self.concave = is_concave(&self.gammas, &self.values, SHAPE_TOL);
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// `true` when `self ≥ other − slack` at every shared point.
    pub fn dominates(&self, other: &SweepCurve, slack: f64) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| *a >= b - slack)
    }

    /// Largest pointwise excess over `other`.
    pub fn max_gain_over(&self, other: &SweepCurve) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `gamma,value_bits,achieved_cost,status`, preceded by
    /// `# key: value` lines for each metadata entry.
    pub fn to_csv(&self, meta: &[(&str, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("gamma,value_bits,achieved_cost,status\n");
        for i in 0..self.len() {
            let status = match (&self.statuses[i], &self.errors[i]) {
                (Some(s), _) => s.to_string(),
                (None, Some(_)) => "error".to_string(),
                (None, None) => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.gammas[i], self.values[i], self.costs[i], status
            ));
        }
        out
    }

    /// Sidecar holding argmax parameters, flags and metadata.
    pub fn to_json(&self, meta: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "meta": meta,
            "curve": self,
        })
    }
}

/// Solves at every budget of the grid; results are kept in grid order.
pub fn sweep<S: Solver + ?Sized>(solver: &S, m: &ProbingModel, gammas: &[f64]) -> Result<SweepCurve> {
    sweep_with(gammas, |g| solver.solve(m, g))
}

/// Like [`sweep`] for any per-budget evaluation.
pub fn sweep_with<F>(gammas: &[f64], eval: F) -> Result<SweepCurve>
where
    F: Fn(f64) -> Result<SolveResult> + Sync,
{
    check_grid(gammas)?;
    let results: Vec<Result<SolveResult>> = gammas.par_iter().map(|&g| eval(g)).collect();
    Ok(SweepCurve::assemble(gammas.to_vec(), results))
}

/// Smallest budget whose value is within `tol` of the curve maximum.
///
/// With `refine`, the gap between that grid point and its left neighbour is
/// bisected using fresh solves.
pub fn cutoff_point(
    curve: &SweepCurve,
    tol: f64,
    refine: Option<&dyn Fn(f64) -> Result<f64>>,
) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::Domain("empty curve".into()));
    }
    if let Some(e) = curve.errors.iter().flatten().next() {
        return Err(Error::Domain(format!("curve contains a failed point: {e}")));
    }
    if !is_monotone(&curve.values, tol) {
        return Err(Error::Domain(format!("curve is not nondecreasing within {tol}")));
    }
    let top = curve.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i = curve
        .values
        .iter()
        .position(|&v| v >= top - tol)
        .expect("maximum is attained");
    let Some(solve) = refine else {
        return Ok(curve.gammas[i]);
    };
    if i == 0 {
        return Ok(curve.gammas[0]);
    }
    let (mut lo, mut hi) = (curve.gammas[i - 1], curve.gammas[i]);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if solve(mid)? >= top - tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Least concave majorant of the curve on its own grid.
///
/// Points lifted by the hull lose their argmax and are marked interpolated.
pub fn upper_concave_envelope(curve: &SweepCurve) -> SweepCurve {
    let pts: Vec<usize> = (0..curve.len()).filter(|&i| !curve.values[i].is_nan()).collect();
    let mut hull: Vec<usize> = Vec::new();
    for &i in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (curve.gammas[b] - curve.gammas[a]) * (curve.values[i] - curve.values[a])
                - (curve.values[b] - curve.values[a]) * (curve.gammas[i] - curve.gammas[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = curve.clone();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a + 1..b {
            let t = (curve.gammas[i] - curve.gammas[a]) / (curve.gammas[b] - curve.gammas[a]);
            let v = (1.0 - t) * curve.values[a] + t * curve.values[b];
            if curve.values[i].is_nan() || v > curve.values[i] {
                out.values[i] = v;
                out.costs[i] = (1.0 - t) * curve.costs[a] + t * curve.costs[b];
                out.statuses[i] = Some(Status::Interpolated);
                out.argmaxes[i] = None;
                out.errors[i] = None;
            }
        }
    }
    out.refresh_flags();
    out
}

/// The line `(1−Γ)·c0 + Γ·c1`: alternate between the two extreme budgets.
pub fn time_sharing_baseline(c0: f64, c1: f64, gammas: &[f64]) -> SweepCurve {
    let n = gammas.len();
    let mut curve = SweepCurve {
        gammas: gammas.to_vec(),
        values: gammas.iter().map(|g| (1.0 - g) * c0 + g * c1).collect(),
        costs: gammas.to_vec(),
        statuses: vec![Some(Status::Interpolated); n],
        argmaxes: vec![None; n],
        errors: vec![None; n],
        monotone: false,
        concave: false,
    };
    curve.refresh_flags();
    curve
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(values: &[f64]) -> SweepCurve {
        let g = linear_grid(0.0, 1.0, values.len());
        SweepCurve::from_points(g, values.to_vec(), Status::Oracle).unwrap()
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = linear_grid(0.0, 1.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert!((g[3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn envelope_of_concave_is_identity() {
        let c = synthetic(&[0.0, 0.5, 0.8, 0.9, 0.95]);
        assert_eq!(upper_concave_envelope(&c).values, c.values);
    }

    #[test]
    fn envelope_of_two_points_is_the_line() {
        let c = synthetic(&[0.2, 0.6]);
        let e = upper_concave_envelope(&c);
        assert_eq!(e.values, c.values);
        let base = time_sharing_baseline(0.2, 0.6, &c.gammas);
        assert_eq!(base.values, e.values);
    }

    #[test]
    fn envelope_matches_pairwise_lines() {
        let v = [0.3, 0.1, 0.0, 0.2, 0.9, 0.4, 0.5];
        let c = synthetic(&v);
        let e = upper_concave_envelope(&c);
        let g = &c.gammas;
        for k in 0..v.len() {
            let mut best = v[k];
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    if g[i] <= g[k] && g[k] <= g[j] {
                        let t = (g[k] - g[i]) / (g[j] - g[i]);
                        best = best.max((1.0 - t) * v[i] + t * v[j]);
                    }
                }
            }
            assert!((e.values[k] - best).abs() < 1e-12, "{k}");
        }
        assert!(e.concave);
    }

    #[test]
    fn cutoff_of_flat_curve_is_leftmost() {
        let c = synthetic(&[0.4; 5]);
        assert_eq!(cutoff_point(&c, 1e-3, None).unwrap(), 0.0);
    }

    #[test]
    fn cutoff_rejects_decreasing_curve() {
        let c = synthetic(&[0.5, 0.4]);
        assert!(cutoff_point(&c, 1e-3, None).is_err());
    }

    #[test]
    fn failed_point_poisons_flags() {
        let m = crate::model::build_example1().unwrap();
        let solver = |m: &ProbingModel, g: f64| crate::solver::solve_thm1(m, g, &Default::default());
        let c = sweep(&solver, &m, &[-0.5, 0.0]).unwrap();
        assert!(c.errors[0].is_some());
        assert!(!c.monotone && !c.concave);
        assert!(c.values[1] > 0.3);
    }

    #[test]
    fn csv_layout() {
        let c = synthetic(&[0.1, 0.2]);
        let csv = c.to_csv(&[("seed", "0".into())]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed: 0");
        assert_eq!(lines[1], "gamma,value_bits,achieved_cost,status");
        assert_eq!(lines[2], "0,0.1,0,oracle");
    }
}
