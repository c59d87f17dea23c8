//! Lower bound on `max I(U;Y,S_d) − I(U;S_e|A)` for a non-causal encoder.
//!
//! The input map `f(u, s_e)` is enumerated (as a multiset of per-symbol maps,
//! since auxiliary labels are interchangeable); for each map the action law
//! and `P_{U|S_e,A}` are found by multistart alternating ascent. The
//! objective is not concave, so results are labelled lower bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::project::{ascend, Polytope};
use super::{Argmax, SolveOptions, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::{thm2_u_bound, ProbingModel};

const INV_LN2: f64 = std::f64::consts::LOG2_E;
const FLOOR: f64 = 1e-300;
const SCREEN_STARTS: usize = 4;
const SCREEN_ITERS: usize = 300;
const POLISHED: usize = 8;

struct Problem {
    na: usize,
    nse: usize,
    nu: usize,
    nv: usize,
    se_given_a: Vec<f64>,
    /// `P(v | a, se, u)` at `[((a·nse + se)·nu + u)·nv + v]`.
    cond: Vec<f64>,
}

struct Marginals {
    u: Vec<f64>,
    v: Vec<f64>,
    uv: Vec<f64>,
    ua: Vec<f64>,
    sea: Vec<f64>,
    usea: Vec<f64>,
    a: Vec<f64>,
}

fn h(m: &[f64]) -> f64 {
    m.iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

fn lg(p: f64) -> f64 {
    p.max(FLOOR).log2()
}

impl Problem {
    fn new(m: &ProbingModel, f: &[Vec<usize>], base: &[f64], nx: usize) -> Self {
        let (na, nse, nu) = (m.ae.size(), m.se.size(), f.len());
        let nv = m.y.size() * m.sd.size();
        let mut se_given_a = vec![0.0; na * nse];
        let mut cond = vec![0.0; na * nse * nu * nv];
        for a in 0..na {
            for se in 0..nse {
                let b = a * nse + se;
                let mass: f64 = (0..nv).map(|v| base[(b * nx) * nv + v]).sum();
                se_given_a[b] = mass;
                if mass > 0.0 {
                    for u in 0..nu {
                        let x = f[u][se];
                        for v in 0..nv {
                            cond[(b * nu + u) * nv + v] = base[(b * nx + x) * nv + v] / mass;
                        }
                    }
                }
            }
        }
        Problem {
            na,
            nse,
            nu,
            nv,
            se_given_a,
            cond,
        }
    }

    fn blocks(&self) -> usize {
        self.na * self.nse
    }

    fn marginals(&self, pa: &[f64], r: &[f64]) -> Marginals {
        let (nse, nu, nv) = (self.nse, self.nu, self.nv);
        let mut mg = Marginals {
            u: vec![0.0; nu],
            v: vec![0.0; nv],
            uv: vec![0.0; nu * nv],
            ua: vec![0.0; nu * self.na],
            sea: vec![0.0; self.blocks()],
            usea: r.to_vec(),
            a: pa.to_vec(),
        };
        for b in 0..self.blocks() {
            let a = b / nse;
            mg.sea[b] = pa[a] * self.se_given_a[b];
            for u in 0..nu {
                let ru = r[b * nu + u];
                if ru == 0.0 {
                    continue;
                }
                mg.u[u] += ru;
                mg.ua[u * self.na + a] += ru;
                for v in 0..nv {
                    let j = ru * self.cond[(b * nu + u) * nv + v];
                    mg.v[v] += j;
                    mg.uv[u * nv + v] += j;
                }
            }
        }
        mg
    }

    fn value_of(mg: &Marginals) -> f64 {
        h(&mg.u) + h(&mg.v) - h(&mg.uv) - h(&mg.ua) - h(&mg.sea) + h(&mg.usea) + h(&mg.a)
    }

    /// Objective and its derivative with respect to `r(a,se,u)`, holding the
    /// action law fixed.
    fn eval_r(&self, pa: &[f64], r: &[f64], grad: &mut [f64]) -> f64 {
        let mg = self.marginals(pa, r);
        let (nse, nu, nv) = (self.nse, self.nu, self.nv);
        let lv: Vec<f64> = mg.v.iter().map(|&p| lg(p)).collect();
        for b in 0..self.blocks() {
            let a = b / nse;
            let fixed = lg(mg.sea[b]) - lg(mg.a[a]) - INV_LN2;
            for u in 0..nu {
                let per_u = -lg(mg.u[u]) + lg(mg.ua[u * self.na + a]) - lg(r[b * nu + u]);
                let mut g = 0.0;
                for v in 0..nv {
                    let q = self.cond[(b * nu + u) * nv + v];
                    if q > 0.0 {
                        g += q * (lg(mg.uv[u * nv + v]) - lv[v]);
                    }
                }
                grad[b * nu + u] = g + per_u + fixed;
            }
        }
        Self::value_of(&mg)
    }

    fn joint_masses(&self, pa: &[f64], pu: &[f64]) -> Vec<f64> {
        let nu = self.nu;
        (0..self.blocks() * nu)
            .map(|i| pa[i / nu / self.nse] * self.se_given_a[i / nu] * pu[i])
            .collect()
    }

    /// Objective and its derivative in the action law at fixed `P(u|se,a)`.
    fn eval_pa(&self, pa: &[f64], pu: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.joint_masses(pa, pu);
        let mut gr = vec![0.0; r.len()];
        let value = self.eval_r(pa, &r, &mut gr);
        let nu = self.nu;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for b in 0..self.blocks() {
            let a = b / self.nse;
            let dot: f64 = (0..nu).map(|u| pu[b * nu + u] * gr[b * nu + u]).sum();
            grad[a] += self.se_given_a[b] * dot;
        }
        // H(Se,A) and H(A) also move with the action law.
        for b in 0..self.blocks() {
            let a = b / self.nse;
            let m = pa[a] * self.se_given_a[b];
            if self.se_given_a[b] > 0.0 {
                grad[a] -= self.se_given_a[b] * (lg(m) + INV_LN2);
            }
        }
        for a in 0..self.na {
            grad[a] += lg(pa[a]) + INV_LN2;
        }
        value
    }

    fn conditional(&self, pa: &[f64], r: &[f64], gr: &[f64]) -> Vec<f64> {
        let nu = self.nu;
        let mut pu = vec![0.0; r.len()];
        for b in 0..self.blocks() {
            let mass = pa[b / self.nse] * self.se_given_a[b];
            let row = &mut pu[b * nu..(b + 1) * nu];
            if mass > 1e-300 {
                let total: f64 = r[b * nu..(b + 1) * nu].iter().sum();
                for u in 0..nu {
                    row[u] = r[b * nu + u] / total;
                }
            } else {
                let best = (0..nu)
                    .max_by(|&i, &j| gr[b * nu + i].total_cmp(&gr[b * nu + j]).then(j.cmp(&i)))
                    .unwrap_or(0);
                row[best] = 1.0;
            }
        }
        pu
    }
}

struct Run {
    value: f64,
    pa: Vec<f64>,
    pu: Vec<f64>,
    trace: Vec<f64>,
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize, shape: f64) -> Vec<f64> {
    let g = Gamma::new(shape, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..n).map(|_| g.sample(rng).max(1e-300)).collect();
    let t: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= t);
    v
}

fn alternate(p: &Problem, pa_poly: &Polytope, pa0: Vec<f64>, pu0: Vec<f64>, budget: usize, ftol: f64) -> Run {
    let nu = p.nu;
    let mut pa = pa_poly.project(&pa0);
    let mut pu = pu0;
    let mut value = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut used = 0;
    while used < budget {
        let masses: Vec<f64> = (0..p.blocks()).map(|b| pa[b / p.nse] * p.se_given_a[b]).collect();
        let mut poly = Polytope::new();
        for (b, &m) in masses.iter().enumerate() {
            poly = poly.block(b * nu, nu, m);
        }
        let inner_iters = (budget - used).min(200);
        let run = ascend(p.joint_masses(&pa, &pu), &poly, |r, g| p.eval_r(&pa, r, g), inner_iters, ftol);
        used += run.trace.len();
        let mut gr = vec![0.0; run.x.len()];
        p.eval_r(&pa, &run.x, &mut gr);
        pu = p.conditional(&pa, &run.x, &gr);
        trace.extend_from_slice(&run.trace);
        let step = ascend(pa.clone(), pa_poly, |a, g| p.eval_pa(a, &pu, g), 20, ftol);
        used += step.trace.len();
        let gain = step.value - value;
        pa = step.x;
        value = step.value;
        trace.push(value);
        if gain < ftol {
            break;
        }
    }
    Run {
        value,
        pa,
        pu,
        trace,
    }
}

fn starts(p: &Problem, rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
    let shape = if k % 2 == 0 { 1.0 } else { 0.2 };
    let pa = if k == 0 {
        vec![1.0 / p.na as f64; p.na]
    } else {
        random_simplex(rng, p.na, shape)
    };
    let pu: Vec<f64> = (0..p.blocks())
        .flat_map(|_| random_simplex(rng, p.nu, shape))
        .collect();
    (pa, pu)
}

/// Multisets of size `nu` drawn from `0..n`, in lexicographic order.
fn multisets(n: usize, nu: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; nu];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..nu).rev().find(|&i| cur[i] + 1 < n) else {
            break;
        };
        let next = cur[i] + 1;
        for c in cur.iter_mut().skip(i) {
            *c = next;
        }
    }
    out
}

/// Best value found for the non-causal objective; always a lower bound.
pub fn solve_thm2_lower(m: &ProbingModel, gamma: f64, opts: &SolveOptions) -> Result<SolveResult> {
    m.check_budget(gamma)?;
    m.require_encoder_only()?;
    if m.input_constraint.is_some() {
        return Err(Error::Unsupported(
            "input constraints are only supported by the full-CSI solver".into(),
        ));
    }
    let bound = thm2_u_bound(m);
    let nu = opts.u_cap.unwrap_or(4).min(bound).max(1);
    let (na, nse, nx, ny, nsd) = (m.ae.size(), m.se.size(), m.x.size(), m.y.size(), m.sd.size());
    let nv = ny * nsd;

    // base[a][se][x][v] = Σ_s P(s) P(se, sd | s, a) W(y | x, s)
    let mut base = vec![0.0; na * nse * nx * nv];
    for a in 0..na {
        for se in 0..nse {
            for x in 0..nx {
                for s in 0..m.s.size() {
                    let ps = m.state.prob(s);
                    let w = m.channel.row(&[x, s]);
                    for sd in 0..nsd {
                        let q = ps * m.probe_prob(s, a, 0, se, sd);
                        if q > 0.0 {
                            for y in 0..ny {
                                base[((a * nse + se) * nx + x) * nv + y * nsd + sd] += q * w[y];
                            }
                        }
                    }
                }
            }
        }
    }
    let live: Vec<usize> = (0..nse)
        .filter(|&se| (0..na).any(|a| (0..nv).any(|v| base[((a * nse + se) * nx) * nv + v] > 0.0)))
        .collect();
    let nvec = (nx as u128).saturating_pow(live.len() as u32);
    let mut count: u128 = 1;
    for i in 0..nu as u128 {
        count = count.saturating_mul(nvec + i) / (i + 1);
    }
    if count > opts.strategy_cap as u128 {
        return Err(Error::Overflow {
            size: count,
            cap: opts.strategy_cap as u128,
        });
    }
    let vectors: Vec<Vec<usize>> = (0..nvec as usize)
        .map(|code| {
            let mut f = vec![0; nse];
            let mut rest = code;
            for &se in live.iter().rev() {
                f[se] = rest % nx;
                rest /= nx;
            }
            f
        })
        .collect();
    let maps: Vec<Vec<Vec<usize>>> = multisets(vectors.len(), nu)
        .into_iter()
        .map(|ms| ms.into_iter().map(|i| vectors[i].clone()).collect())
        .collect();

    let cost: Vec<f64> = (0..na).map(|a| m.cost.get(a, 0)).collect();
    let mut pa_poly = Polytope::new().block(0, na, 1.0);
    if cost.iter().any(|&c| c > gamma) {
        pa_poly = pa_poly.halfspace(cost.clone(), gamma);
    }
    let ftol = opts.tol * 1e-3;

    let run_map = |idx: usize, nstarts: usize, budget: usize| -> Run {
        let p = Problem::new(m, &maps[idx], &base, nx);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(idx as u64);
        let mut best: Option<Run> = None;
        for k in 0..nstarts {
            let (pa0, pu0) = starts(&p, &mut rng, k);
            let run = alternate(&p, &pa_poly, pa0, pu0, budget, ftol);
            if best.as_ref().is_none_or(|b| run.value > b.value) {
                best = Some(run);
            }
        }
        best.expect("at least one start")
    };

    use rayon::prelude::*;
    let mut screened: Vec<(usize, f64)> = (0..maps.len())
        .into_par_iter()
        .map(|i| (i, run_map(i, SCREEN_STARTS, SCREEN_ITERS).value))
        .collect();
    screened.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let finalists: Vec<usize> = screened.iter().take(POLISHED).map(|c| c.0).collect();
    let polished: Vec<(usize, Run)> = finalists
        .par_iter()
        .map(|&i| (i, run_map(i, opts.multistarts.max(1), opts.max_iter)))
        .collect();
    let (idx, best) = polished
        .into_iter()
        .fold(None::<(usize, Run)>, |acc, (i, r)| match acc {
            Some((j, b)) if b.value >= r.value => Some((j, b)),
            _ => Some((i, r)),
        })
        .expect("at least one map");

    let mut rows = Vec::with_capacity(nse * na);
    for se in 0..nse {
        for a in 0..na {
            let b = a * nse + se;
            rows.push(best.pu[b * nu..(b + 1) * nu].to_vec());
        }
    }
    Ok(SolveResult {
        value: best.value.max(0.0),
        achieved_cost: best.pa.iter().zip(&cost).map(|(p, c)| p * c).sum(),
        argmax: Argmax::Thm2 {
            pa: best.pa,
            pu: rows,
            f: maps[idx].clone(),
        },
        trace: best.trace,
        status: Status::MultistartBest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_count() {
        assert_eq!(multisets(8, 4).len(), 330);
        assert_eq!(multisets(3, 2), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]);
    }

    #[test]
    fn matches_full_csi_on_example1() {
        use crate::model::build_example1;
        use crate::solver::solve_thm1;
        let m = build_example1().unwrap();
        let opts = SolveOptions::default();
        for gamma in [0.0, 0.5, 1.0] {
            let lower = solve_thm2_lower(&m, gamma, &opts).unwrap();
            let full = solve_thm1(&m, gamma, &opts).unwrap();
            eprintln!("{gamma} {} {}", lower.value, full.value);
            assert!(lower.value <= full.value + 1e-6);
            assert!((lower.value - full.value).abs() < 3e-3);
        }
    }
}
