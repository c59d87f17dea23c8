//! Exhaustive grid search for the full-CSI objective, written independently
//! of the gradient solver and used as its reference.

use super::{Argmax, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::ProbingModel;

const MAX_PARAMS: usize = 6;

/// All points of the simplex of dimension `n` whose coordinates are
/// multiples of `1/k`.
fn simplex_grid(n: usize, k: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / k as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(n, left - c, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Grid search over `P_A` and every reachable row of `P_{X|Se,A}`.
///
/// With two actions whose cheaper one reveals nothing about the state,
/// `P_A` is fixed at the budget (spending more can only help); otherwise the
/// action law is gridded too, including the budget boundary.
pub fn grid_oracle_thm1(m: &ProbingModel, gamma: f64, resolution: f64) -> Result<SolveResult> {
    m.check_budget(gamma)?;
    m.require_encoder_only()?;
    if m.decoder_state_map().is_none() {
        return Err(Error::Unsupported("grid oracle needs decoder state information".into()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Domain(format!("resolution {resolution} outside (0, 1]")));
    }
    let k = (1.0 / resolution).round().max(1.0) as usize;
    let (na, nse, ns, nx, ny) = (m.ae.size(), m.se.size(), m.s.size(), m.x.size(), m.y.size());
    let obs = m.encoder_observation()?;
    let ps = m.state.mass();
    let cost: Vec<f64> = (0..na).map(|a| m.cost.get(a, 0)).collect();

    // (se, a) pairs that occur with positive probability.
    let rows: Vec<(usize, usize)> = (0..nse)
        .flat_map(|se| (0..na).map(move |a| (se, a)))
        .filter(|&(se, a)| (0..ns).any(|s| ps[s] * obs.prob(&[s, a], se) > 0.0))
        .collect();

    let blind = |a: usize| {
        (0..nse).all(|se| {
            let p: Vec<f64> = (0..ns).filter(|&s| ps[s] > 0.0).map(|s| obs.prob(&[s, a], se)).collect();
            p.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12)
        })
    };
    let action_laws: Vec<Vec<f64>> = if na == 1 {
        vec![vec![1.0]]
    } else if na == 2 {
        let (lo, hi) = if cost[1] < cost[0] { (1, 0) } else { (0, 1) };
        let span = cost[hi] - cost[lo];
        let tmax = if span > 0.0 {
            ((gamma - cost[lo]) / span).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let law = |t: f64| {
            let mut pa = vec![0.0; 2];
            pa[lo] = 1.0 - t;
            pa[hi] = t;
            pa
        };
        if blind(lo) {
            vec![law(tmax)]
        } else {
            let mut ts: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).filter(|&t| t < tmax).collect();
            ts.push(tmax);
            ts.into_iter().map(law).collect()
        }
    } else {
        simplex_grid(na, k)
            .into_iter()
            .filter(|pa| pa.iter().zip(&cost).map(|(p, c)| p * c).sum::<f64>() <= gamma + 1e-12)
            .collect()
    };
    let pa_params = if action_laws.len() > 1 { na - 1 } else { 0 };
    let params = pa_params + rows.len() * (nx - 1);
    if params > MAX_PARAMS {
        return Err(Error::Overflow {
            size: params as u128,
            cap: MAX_PARAMS as u128,
        });
    }

    let row_grid = simplex_grid(nx, k);
    let input = m.input_constraint.as_ref();
    // W(y|x,s) and Σ_y W log2 W.
    let table: Vec<f64> = (0..nx * ns * ny)
        .map(|i| m.channel.prob(&[i / (ns * ny), (i / ny) % ns], i % ny))
        .collect();
    let w = |x: usize, s: usize, y: usize| table[(x * ns + s) * ny + y];
    let neg_h: Vec<f64> = (0..nx * ns)
        .map(|i| {
            let (x, s) = (i / ns, i % ns);
            (0..ny).map(|y| w(x, s, y)).filter(|&p| p > 0.0).map(|p| p * p.log2()).sum()
        })
        .collect();

    let mut best_value = f64::NEG_INFINITY;
    let mut best: Option<(Vec<f64>, Vec<usize>)> = None;
    let nrows = rows.len();
    let mut choice = vec![0usize; nrows];
    let mut pxs = vec![0.0; nx * ns];
    for pa in &action_laws {
        // weight[r][s] = P_A(a) P(s) P(se | s, a) for row r = (se, a)
        let weight: Vec<Vec<f64>> = rows
            .iter()
            .map(|&(se, a)| (0..ns).map(|s| pa[a] * ps[s] * obs.prob(&[s, a], se)).collect())
            .collect();
        let outer = nrows.saturating_sub(1);
        let outer_count = row_grid.len().pow(outer as u32);
        for idx in 0..outer_count {
            let mut rest = idx;
            for c in choice.iter_mut().take(outer) {
                *c = rest % row_grid.len();
                rest /= row_grid.len();
            }
            let mut base = vec![0.0; nx * ns];
            for r in 0..outer {
                let v = &row_grid[choice[r]];
                for x in 0..nx {
                    for s in 0..ns {
                        base[x * ns + s] += weight[r][s] * v[x];
                    }
                }
            }
            let last_options = if nrows == 0 { 1 } else { row_grid.len() };
            for last in 0..last_options {
                pxs.copy_from_slice(&base);
                if nrows > 0 {
                    let v = &row_grid[last];
                    for x in 0..nx {
                        for s in 0..ns {
                            pxs[x * ns + s] += weight[nrows - 1][s] * v[x];
                        }
                    }
                }
                if let Some(c) = input {
                    let load: f64 = (0..nx * ns).map(|i| pxs[i] * c.weights[i / ns]).sum();
                    if load > c.bound + 1e-12 {
                        continue;
                    }
                }
                let mut value = 0.0;
                for s in 0..ns {
                    if ps[s] <= 0.0 {
                        continue;
                    }
                    for y in 0..ny {
                        let pys: f64 = (0..nx).map(|x| pxs[x * ns + s] * w(x, s, y)).sum();
                        if pys > 0.0 {
                            value -= pys * (pys / ps[s]).log2();
                        }
                    }
                    for x in 0..nx {
                        value += pxs[x * ns + s] * neg_h[x * ns + s];
                    }
                }
                if value > best_value + 1e-15 {
                    best_value = value;
                    if nrows > 0 {
                        choice[nrows - 1] = last;
                    }
                    best = Some((pa.clone(), choice.clone()));
                }
            }
        }
    }
    let (pa, picks) = best.ok_or_else(|| Error::Domain("no grid point satisfies the constraints".into()))?;
    let mut px = vec![vec![1.0 / nx as f64; nx]; nse * na];
    for (r, &(se, a)) in rows.iter().enumerate() {
        px[se * na + a] = row_grid[picks[r]].clone();
    }
    Ok(SolveResult {
        value: best_value.max(0.0),
        achieved_cost: pa.iter().zip(&cost).map(|(p, c)| p * c).sum(),
        argmax: Argmax::Thm1 { pa, px },
        trace: Vec::new(),
        status: Status::Oracle,
    })
}
