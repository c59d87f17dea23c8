//! Capacity-cost functions of single-letter channels by Blahut-Arimoto with
//! a Lagrange multiplier on the cost.

use super::linalg::null_vector;
use super::{Argmax, SolveResult, Status};
use crate::error::{Error, Result};
use crate::CondKernel;

const LOG2E: f64 = std::f64::consts::LOG2_E;
const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 100;

/// Channel rows `rows[u][v]` together with a cost per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct CostedChannel {
    pub rows: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
}

impl CostedChannel {
    pub fn new(rows: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<Self> {
        if rows.is_empty() || rows.len() != cost.len() {
            return Err(Error::Dimension(format!(
                "{} rows with {} costs",
                rows.len(),
                cost.len()
            )));
        }
        let width = rows[0].len();
        for row in &rows {
            let sum: f64 = row.iter().sum();
            if row.len() != width || row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidDistribution("channel row is not a distribution".into()));
            }
        }
        if cost.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Domain("costs must be nonnegative".into()));
        }
        Ok(CostedChannel { rows, cost })
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    fn output_law(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs()];
        for (row, &pu) in self.rows.iter().zip(p) {
            if pu > 0.0 {
                for (o, q) in out.iter_mut().zip(row) {
                    *o += pu * q;
                }
            }
        }
        out
    }

    /// `D(Q_u || pQ)` in nats for every input.
    fn divergences(&self, p: &[f64]) -> Vec<f64> {
        let out = self.output_law(p);
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&out)
                    .filter(|(q, _)| **q > 0.0)
                    .map(|(q, o)| if *o > 0.0 { q * (q / o).ln() } else { f64::INFINITY })
                    .sum()
            })
            .collect()
    }

    /// `I(U;V)` in bits.
    pub fn information(&self, p: &[f64]) -> f64 {
        let d = self.divergences(p);
        LOG2E * p.iter().zip(&d).filter(|(pu, _)| **pu > 0.0).map(|(pu, du)| pu * du).sum::<f64>()
    }

    pub fn expected_cost(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.cost).map(|(a, b)| a * b).sum()
    }
}

struct Fixed {
    p: Vec<f64>,
    /// Bounds on `max_p I(p) − s·E[cost]`, in nats.
    lower: f64,
    upper: f64,
    trace: Vec<f64>,
}

/// Blahut-Arimoto at a fixed multiplier over the inputs allowed by `mask`.
fn fixed_multiplier(
    ch: &CostedChannel,
    s: f64,
    mask: &[bool],
    warm: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Fixed {
    let n = ch.inputs();
    let allowed = mask.iter().filter(|&&b| b).count() as f64;
    let mut p: Vec<f64> = match warm {
        Some(w) if w.iter().zip(mask).all(|(v, &m)| m || *v == 0.0) => {
            let mixed: Vec<f64> = w
                .iter()
                .zip(mask)
                .map(|(v, &m)| if m { 0.99 * v + 0.01 / allowed } else { 0.0 })
                .collect();
            let t: f64 = mixed.iter().sum();
            mixed.into_iter().map(|v| v / t).collect()
        }
        _ => mask.iter().map(|&m| if m { 1.0 / allowed } else { 0.0 }).collect(),
    };
    let mut trace = Vec::new();
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..max_iter.max(1) {
        let d = ch.divergences(&p);
        let e: Vec<f64> = (0..n)
            .map(|u| if mask[u] { d[u] - s * ch.cost[u] } else { f64::NEG_INFINITY })
            .collect();
        let current: f64 = (0..n).filter(|&u| p[u] > 0.0).map(|u| p[u] * e[u]).sum();
        trace.push(current * LOG2E);
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = (0..n).filter(|&u| mask[u]).map(|u| p[u] * (e[u] - top).exp()).sum();
        lower = current.max(top + z.ln());
        upper = top;
        if upper - lower < tol {
            break;
        }
        for u in 0..n {
            p[u] = if mask[u] { p[u] * (e[u] - top).exp() / z } else { 0.0 };
        }
    }
    Fixed {
        p,
        lower,
        upper,
        trace,
    }
}

/// Optimum of a capacity-cost problem over one or more channels, where a
/// time-sharing variable picks the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    /// Primal value in bits.
    pub value: f64,
    /// Dual upper bound in bits.
    pub bound: f64,
    /// Weight of each channel.
    pub weights: Vec<f64>,
    /// Input law per channel (uniform where the weight is zero).
    pub inputs: Vec<Vec<f64>>,
    pub cost: f64,
    pub trace: Vec<f64>,
}

struct Point {
    k: usize,
    p: Vec<f64>,
    cost: f64,
    info: f64,
    /// Lower bound on the Lagrangian value, in nats.
    lower: f64,
    /// Upper bound on the Lagrangian value over all channels, in bits.
    dual: f64,
    trace: Vec<f64>,
}

/// `max Σ_k w_k I(p_k; Q_k)` subject to `Σ_k w_k E_{p_k}[c_k] ≤ Γ`.
pub fn capacity_cost_combined(channels: &[CostedChannel], gamma: f64, tol: f64) -> Result<Combined> {
    capacity_cost_combined_iter(channels, gamma, tol, 200_000)
}

pub(crate) fn capacity_cost_combined_iter(
    channels: &[CostedChannel],
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Combined> {
    if channels.is_empty() {
        return Err(Error::Domain("no channels".into()));
    }
    let min_cost = channels
        .iter()
        .flat_map(|c| c.cost.iter().copied())
        .fold(f64::INFINITY, f64::min);
    if !(gamma >= min_cost - 1e-12) {
        return Err(Error::Infeasible { gamma, min_cost });
    }
    let inner_tol = (tol / LOG2E * 0.1).max(1e-15);
    let floor_only = gamma <= min_cost + 1e-12;
    let masks: Vec<Vec<bool>> = channels
        .iter()
        .map(|c| c.cost.iter().map(|&v| !floor_only || v <= min_cost + 1e-12).collect())
        .collect();
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; channels.len()];

    let mut solve_at = |s: f64| -> Point {
        let mut best: Option<Point> = None;
        let mut upper = f64::NEG_INFINITY;
        for (k, ch) in channels.iter().enumerate() {
            if !masks[k].iter().any(|&b| b) {
                continue;
            }
            let run = fixed_multiplier(ch, s, &masks[k], warm[k].as_deref(), inner_tol, max_iter);
            warm[k] = Some(run.p.clone());
            upper = upper.max(run.upper);
            if best.as_ref().is_none_or(|b| run.lower > b.lower + 1e-15) {
                best = Some(Point {
                    k,
                    info: ch.information(&run.p),
                    cost: ch.expected_cost(&run.p),
                    lower: run.lower,
                    dual: 0.0,
                    trace: run.trace,
                    p: run.p,
                });
            }
        }
        let mut best = best.expect("some channel has an allowed input");
        best.dual = upper * LOG2E;
        best
    };

    let finish = |lo: Point, hi: Option<Point>, dual: f64| -> Combined {
        let n = channels.len();
        let mut weights = vec![0.0; n];
        let mut inputs: Vec<Vec<f64>> = channels
            .iter()
            .map(|c| vec![1.0 / c.inputs() as f64; c.inputs()])
            .collect();
        let (value, cost, trace);
        match hi {
            None => {
                weights[lo.k] = 1.0;
                value = lo.info;
                cost = lo.cost;
                trace = lo.trace;
                inputs[lo.k] = lo.p;
            }
            Some(hi) => {
                // lo exceeds the budget, hi is within it
                let theta = if lo.cost > hi.cost {
                    ((gamma - hi.cost) / (lo.cost - hi.cost)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                if lo.k == hi.k {
                    let p: Vec<f64> = lo.p.iter().zip(&hi.p).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
                    weights[lo.k] = 1.0;
                    value = channels[lo.k].information(&p);
                    cost = channels[lo.k].expected_cost(&p);
                    inputs[lo.k] = p;
                } else {
                    weights[lo.k] = theta;
                    weights[hi.k] = 1.0 - theta;
                    value = theta * lo.info + (1.0 - theta) * hi.info;
                    cost = theta * lo.cost + (1.0 - theta) * hi.cost;
                    inputs[lo.k] = lo.p;
                    inputs[hi.k] = hi.p;
                }
                trace = hi.trace;
            }
        }
        Combined {
            value,
            bound: dual.max(value),
            weights,
            inputs,
            cost,
            trace,
        }
    };

    let at_zero = solve_at(0.0);
    if at_zero.cost <= gamma + 1e-12 {
        let dual = at_zero.dual;
        return Ok(finish(at_zero, None, dual));
    }
    // Cost is nonincreasing in the multiplier; bracket the budget.
    let mut best_dual = at_zero.dual;
    let mut lo = (0.0, at_zero);
    let mut s_hi = 1.0;
    let mut hi = solve_at(s_hi);
    best_dual = best_dual.min(hi.dual + s_hi * gamma * LOG2E);
    let mut doublings = 0;
    while hi.cost > gamma + 1e-12 && doublings < MAX_DOUBLINGS {
        lo = (s_hi, hi);
        s_hi *= 2.0;
        hi = solve_at(s_hi);
        best_dual = best_dual.min(hi.dual + s_hi * gamma * LOG2E);
        doublings += 1;
    }
    let mut hi = (s_hi, hi);
    for _ in 0..MAX_BISECTIONS {
        let gap = best_dual - primal_estimate(&lo.1, &hi.1, gamma);
        if gap < tol || hi.0 - lo.0 < 1e-13 * hi.0 {
            break;
        }
        let mid = 0.5 * (lo.0 + hi.0);
        let point = solve_at(mid);
        best_dual = best_dual.min(point.dual + mid * gamma * LOG2E);
        if point.cost > gamma + 1e-12 {
            lo = (mid, point);
        } else {
            hi = (mid, point);
        }
    }
    Ok(finish(lo.1, Some(hi.1), best_dual))
}

fn primal_estimate(lo: &Point, hi: &Point, gamma: f64) -> f64 {
    if lo.cost <= hi.cost {
        return hi.info;
    }
    let theta = ((gamma - hi.cost) / (lo.cost - hi.cost)).clamp(0.0, 1.0);
    theta * lo.info + (1.0 - theta) * hi.info
}

/// Shrinks the support of `p` to at most `limit` points while keeping the
/// output law and the expected cost, without decreasing `I(p; Q)`.
pub(crate) fn reduce_support(ch: &CostedChannel, p: &mut [f64], limit: usize) {
    let entropy = |row: &[f64]| -> f64 {
        row.iter().filter(|&&q| q > 0.0).map(|q| -q * q.log2()).sum()
    };
    loop {
        let support: Vec<usize> = (0..p.len()).filter(|&u| p[u] > 1e-15).collect();
        for u in 0..p.len() {
            if p[u] <= 1e-15 {
                p[u] = 0.0;
            }
        }
        if support.len() <= limit {
            break;
        }
        let mut rows: Vec<Vec<f64>> = (0..ch.outputs())
            .map(|v| support.iter().map(|&u| ch.rows[u][v]).collect())
            .collect();
        rows.push(support.iter().map(|&u| ch.cost[u]).collect());
        let Some(mut z) = null_vector(&rows, support.len()) else {
            break;
        };
        // Output law is fixed along z, so the objective changes by -Σ z H(Q_u).
        let slope: f64 = support.iter().zip(&z).map(|(&u, zi)| -zi * entropy(&ch.rows[u])).sum();
        if slope < 0.0 {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        let step = support
            .iter()
            .zip(&z)
            .filter(|(_, &zi)| zi < 0.0)
            .map(|(&u, &zi)| p[u] / -zi)
            .fold(f64::INFINITY, f64::min);
        if !step.is_finite() {
            break;
        }
        let mut hit = None;
        for (&u, &zi) in support.iter().zip(&z) {
            p[u] += step * zi;
            if zi < 0.0 && (p[u] / -zi).abs() < 1e-12 && hit.is_none() {
                hit = Some(u);
            }
            if p[u] < 0.0 {
                p[u] = 0.0;
            }
        }
        if let Some(u) = hit {
            p[u] = 0.0;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
    }
}

/// Capacity-cost value `C(Γ)` of one channel.
pub fn blahut_arimoto_constrained(
    ch: &CondKernel,
    cost_per_input: &[f64],
    gamma: f64,
    tol: f64,
) -> Result<SolveResult> {
    if ch.inputs().len() != 1 {
        return Err(Error::Dimension("expected a single-input kernel".into()));
    }
    let channel = CostedChannel::new(ch.rows().to_vec(), cost_per_input.to_vec())?;
    let out = capacity_cost_combined(std::slice::from_ref(&channel), gamma, tol)?;
    Ok(SolveResult {
        value: out.value.max(0.0),
        achieved_cost: out.cost,
        argmax: Argmax::Input {
            p: out.inputs[0].clone(),
        },
        trace: out.trace,
        status: Status::Converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, Alphabet};

    fn kernel(rows: Vec<Vec<f64>>) -> CondKernel {
        let n = rows.len();
        let m = rows[0].len();
        CondKernel::new(
            vec![Alphabet::range("U", n).unwrap()],
            Alphabet::range("V", m).unwrap(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_and_bsc() {
        let id = kernel(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = blahut_arimoto_constrained(&id, &[0.0, 0.0], 0.0, 1e-9).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let bsc = kernel(vec![vec![0.7, 0.3], vec![0.3, 0.7]]);
        let r = blahut_arimoto_constrained(&bsc, &[0.0, 0.0], 0.0, 1e-9).unwrap();
        assert!((r.value - (1.0 - binary_entropy(0.3).unwrap())).abs() < 1e-6);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn single_usable_input() {
        let id = kernel(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = blahut_arimoto_constrained(&id, &[0.0, 1.0], 0.0, 1e-9).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn cost_constraint_binds() {
        // noiseless binary channel, P(U=1) <= 0.2 gives h2(0.2)
        let id = kernel(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = blahut_arimoto_constrained(&id, &[0.0, 1.0], 0.2, 1e-9).unwrap();
        assert!((r.value - binary_entropy(0.2).unwrap()).abs() < 1e-7, "{}", r.value);
        assert!(r.achieved_cost <= 0.2 + 1e-9);
    }

    #[test]
    fn support_reduction_keeps_value() {
        let ch = CostedChannel::new(
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.5, 0.5],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
            vec![0.0; 5],
        )
        .unwrap();
        let mut p = vec![0.2; 5];
        let before = ch.information(&p);
        reduce_support(&ch, &mut p, 3);
        assert!(p.iter().filter(|&&v| v > 0.0).count() <= 3);
        assert!(ch.information(&p) >= before - 1e-12);
    }
}
