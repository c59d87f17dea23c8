//! Causal encoders as Shannon strategies: each auxiliary symbol is an action
//! together with a map from the observed state to the input.

use serde::Serialize;

use super::ba::{capacity_cost_combined_iter, reduce_support, Combined, CostedChannel};
use super::{Argmax, SolveOptions, SolveResult, Status, WeightedStrategy};
use crate::error::{Error, Result};
use crate::model::ProbingModel;

/// An encoder action and the input used for every `s_e` that can follow it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub action: usize,
    pub inputs: Vec<Option<usize>>,
}

/// `s_e` values with positive probability under `(a_e, a_d)`.
fn reachable(m: &ProbingModel, ae: usize, ad: usize) -> Vec<bool> {
    let nsd = m.sd.size();
    (0..m.se.size())
        .map(|se| {
            (0..m.s.size()).any(|s| {
                m.state.prob(s) > 0.0 && (0..nsd).any(|sd| m.probe_prob(s, ae, ad, se, sd) > 0.0)
            })
        })
        .collect()
}

fn strategy_count(m: &ProbingModel, ad: usize) -> u128 {
    (0..m.ae.size())
        .map(|ae| {
            let r = reachable(m, ae, ad).iter().filter(|&&b| b).count() as u32;
            (m.x.size() as u128).saturating_pow(r)
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// All strategies under decoder action `ad`, in lexicographic order of
/// (action, inputs). Errors when more than `cap` would be produced.
pub fn enumerate_strategies(m: &ProbingModel, ad: usize, cap: usize) -> Result<Vec<Strategy>> {
    let size = strategy_count(m, ad);
    if size > cap as u128 {
        return Err(Error::Overflow {
            size,
            cap: cap as u128,
        });
    }
    let nx = m.x.size();
    let mut out = Vec::with_capacity(size as usize);
    for ae in 0..m.ae.size() {
        let live: Vec<usize> = reachable(m, ae, ad)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        let count = nx.pow(live.len() as u32);
        for code in 0..count {
            let mut inputs = vec![None; m.se.size()];
            let mut rest = code;
            for &se in live.iter().rev() {
                inputs[se] = Some(rest % nx);
                rest /= nx;
            }
            out.push(Strategy { action: ae, inputs });
        }
    }
    Ok(out)
}

/// Induced channel from strategies to `V = (Y, S_d)` (`y` outer) under
/// decoder action `ad`, with per-strategy cost.
fn strategy_channel(m: &ProbingModel, ad: usize, strategies: &[Strategy]) -> Result<CostedChannel> {
    let (ny, nsd) = (m.y.size(), m.sd.size());
    let rows = strategies
        .iter()
        .map(|st| {
            let mut row = vec![0.0; ny * nsd];
            for s in 0..m.s.size() {
                let ps = m.state.prob(s);
                if ps == 0.0 {
                    continue;
                }
                for se in 0..m.se.size() {
                    let Some(x) = st.inputs[se] else { continue };
                    let w = m.channel.row(&[x, s]);
                    for sd in 0..nsd {
                        let q = ps * m.probe_prob(s, st.action, ad, se, sd);
                        if q > 0.0 {
                            for y in 0..ny {
                                row[y * nsd + sd] += q * w[y];
                            }
                        }
                    }
                }
            }
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            row
        })
        .collect();
    let cost = strategies.iter().map(|st| m.cost.get(st.action, ad)).collect();
    CostedChannel::new(rows, cost)
}

fn no_input_constraint(m: &ProbingModel) -> Result<()> {
    if m.input_constraint.is_some() {
        return Err(Error::Unsupported(
            "input constraints are only supported by the full-CSI solver".into(),
        ));
    }
    Ok(())
}

fn support(strategies: &[Strategy], p: &[f64]) -> Vec<WeightedStrategy> {
    strategies
        .iter()
        .zip(p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(st, &w)| WeightedStrategy {
            weight: w,
            action: st.action,
            inputs: st.inputs.clone(),
        })
        .collect()
}

/// Lexicographic k-subsets of `0..n`.
fn subsets(n: usize, k: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut count: u128 = 1;
    for i in 0..k as u128 {
        count = count * (n as u128 - i) / (i + 1);
    }
    if count > cap as u128 {
        return Err(Error::Overflow {
            size: count,
            cap: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// `max I(U; Y, S_d)` with `A = g(U)` and `X = f(U, S_e)`.
pub fn solve_thm3(m: &ProbingModel, gamma: f64, opts: &SolveOptions) -> Result<SolveResult> {
    m.check_budget(gamma)?;
    m.require_encoder_only()?;
    no_input_constraint(m)?;
    let strategies = enumerate_strategies(m, 0, opts.strategy_cap)?;
    let channel = strategy_channel(m, 0, &strategies)?;
    let limit = crate::model::thm3_u_bound(m);

    let restricted = opts.u_cap.filter(|&k| k < strategies.len());
    let (mut out, chosen): (Combined, Vec<usize>) = match restricted {
        None => (
            capacity_cost_combined_iter(std::slice::from_ref(&channel), gamma, opts.tol, opts.max_iter * 10)?,
            (0..strategies.len()).collect(),
        ),
        Some(k) => {
            let mut best: Option<(Combined, Vec<usize>)> = None;
            for subset in subsets(strategies.len(), k.max(1), opts.strategy_cap)? {
                let sub = CostedChannel::new(
                    subset.iter().map(|&u| channel.rows[u].clone()).collect(),
                    subset.iter().map(|&u| channel.cost[u]).collect(),
                )?;
                match capacity_cost_combined_iter(&[sub], gamma, opts.tol, opts.max_iter * 10) {
                    Ok(c) if best.as_ref().is_none_or(|b| c.value > b.0.value + 1e-12) => {
                        best = Some((c, subset));
                    }
                    Ok(_) | Err(Error::Infeasible { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            best.ok_or(Error::Infeasible {
                gamma,
                min_cost: m.min_cost(),
            })?
        }
    };
    let sub_strategies: Vec<Strategy> = chosen.iter().map(|&u| strategies[u].clone()).collect();
    let sub_channel = CostedChannel::new(
        chosen.iter().map(|&u| channel.rows[u].clone()).collect(),
        chosen.iter().map(|&u| channel.cost[u]).collect(),
    )?;
    let mut p = out.inputs.swap_remove(0);
    reduce_support(&sub_channel, &mut p, limit);
    Ok(SolveResult {
        value: sub_channel.information(&p).max(0.0),
        achieved_cost: sub_channel.expected_cost(&p),
        argmax: Argmax::Thm3 {
            support: support(&sub_strategies, &p),
        },
        trace: out.trace,
        status: Status::Converged,
    })
}

/// `max I(U; Y, S_d | A_d)` with `A_e = g(U, A_d)` and `X = f(U, S_e, A_d)`.
///
/// The objective splits into one capacity-cost problem per decoder action;
/// `P(A_d)` and the per-action budgets are found exactly through a shared
/// Lagrange multiplier.
pub fn solve_thm4(m: &ProbingModel, gamma: f64, opts: &SolveOptions) -> Result<SolveResult> {
    m.check_budget(gamma)?;
    no_input_constraint(m)?;
    if opts.u_cap.is_some() {
        return Err(Error::Unsupported(
            "restricting |U| is only supported without decoder actions".into(),
        ));
    }
    let nad = m.ad.size();
    let total: u128 = (0..nad).map(|ad| strategy_count(m, ad)).sum();
    if total > opts.strategy_cap as u128 {
        return Err(Error::Overflow {
            size: total,
            cap: opts.strategy_cap as u128,
        });
    }
    let mut strategies = Vec::with_capacity(nad);
    let mut channels = Vec::with_capacity(nad);
    for ad in 0..nad {
        let st = enumerate_strategies(m, ad, opts.strategy_cap)?;
        channels.push(strategy_channel(m, ad, &st)?);
        strategies.push(st);
    }
    let out = capacity_cost_combined_iter(&channels, gamma, opts.tol, opts.max_iter * 10)?;
    let limit = m.y.size() * m.sd.size() + 1;
    let mut value = 0.0;
    let mut cost = 0.0;
    let mut per_ad = Vec::with_capacity(nad);
    for ad in 0..nad {
        let mut p = out.inputs[ad].clone();
        if out.weights[ad] > 0.0 {
            reduce_support(&channels[ad], &mut p, limit);
            value += out.weights[ad] * channels[ad].information(&p);
            cost += out.weights[ad] * channels[ad].expected_cost(&p);
            per_ad.push(support(&strategies[ad], &p));
        } else {
            per_ad.push(Vec::new());
        }
    }
    Ok(SolveResult {
        value: value.max(0.0),
        achieved_cost: cost,
        argmax: Argmax::Thm4 {
            pad: out.weights,
            support: per_ad,
        },
        trace: out.trace,
        status: Status::Converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_example1;

    #[test]
    fn example1_strategy_alphabet() {
        let m = build_example1().unwrap();
        let st = enumerate_strategies(&m, 0, 4096).unwrap();
        assert_eq!(st.len(), 6);
        assert_eq!(st[0], Strategy { action: 0, inputs: vec![Some(0), None, None] });
        assert!(matches!(
            enumerate_strategies(&m, 0, 5),
            Err(Error::Overflow { size: 6, cap: 5 })
        ));
    }

    #[test]
    fn subsets_are_lexicographic() {
        let s = subsets(4, 2, 100).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[5], vec![2, 3]);
    }

    #[test]
    fn example1_matches_full_csi_solver() {
        let m = build_example1().unwrap();
        let opts = SolveOptions::default();
        for g in [0.0, 0.3, 1.0] {
            let a = solve_thm3(&m, g, &opts).unwrap();
            let b = super::super::solve_thm1(&m, g, &opts).unwrap();
            assert!((a.value - b.value).abs() < 1e-6, "{g}: {} {}", a.value, b.value);
            assert!(a.achieved_cost <= g + 1e-9);
            let Argmax::Thm3 { support } = &a.argmax else { panic!() };
            assert!(support.len() <= crate::model::thm3_u_bound(&m));
        }
    }

    #[test]
    fn single_symbol_auxiliary_is_zero() {
        let m = build_example1().unwrap();
        let opts = SolveOptions {
            u_cap: Some(1),
            ..SolveOptions::default()
        };
        assert!(solve_thm3(&m, 0.5, &opts).unwrap().value.abs() < 1e-12);
    }
}
