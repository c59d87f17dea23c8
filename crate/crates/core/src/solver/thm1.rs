//! `max I(X;Y|S)` over `P_A`, `P_{X|Se,A}` subject to `E[Λ(A)] ≤ Γ`.
//!
//! For a fixed action law the objective is concave in the joint masses
//! `r(a,se,x) = P(a)P(se|a)P(x|se,a)`, which is the parametrization used by the
//! inner solve. The value as a function of the action law is concave as well,
//! which the outer searches rely on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::project::{ascend, Polytope};
use super::{Argmax, SolveOptions, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::{joint_thm1, roles, ProbingModel};
use crate::{CondKernel, JointTable, ProbDist};

const INV_LN2: f64 = std::f64::consts::LOG2_E;

pub(crate) struct Thm1Problem {
    pub na: usize,
    pub nse: usize,
    pub ns: usize,
    pub nx: usize,
    ny: usize,
    ps: Vec<f64>,
    /// `P(s | se, a)` at `[(a·nse + se)·ns + s]`, zero when `se` cannot occur.
    k: Vec<f64>,
    /// `P(se | a)` at `[a·nse + se]`.
    pub se_given_a: Vec<f64>,
    /// `P(y | x, s)` at `[(x·ns + s)·ny + y]`.
    w: Vec<f64>,
    /// `Σ_y W log2 W` at `[x·ns + s]`.
    hw: Vec<f64>,
    pub cost: Vec<f64>,
    pub input: Option<(Vec<f64>, f64)>,
}

pub(crate) struct Inner {
    pub value: f64,
    /// `P(x | se, a)` at `[(a·nse + se)·nx + x]`.
    pub px: Vec<f64>,
    pub trace: Vec<f64>,
}

impl Thm1Problem {
    pub fn new(m: &ProbingModel) -> Result<Self> {
        m.require_encoder_only()?;
        if m.decoder_state_map().is_none() {
            return Err(Error::Unsupported(
                "this objective needs the decoder to observe the state; use the strategy solver"
                    .into(),
            ));
        }
        let (na, nse, ns, nx, ny) = (m.ae.size(), m.se.size(), m.s.size(), m.x.size(), m.y.size());
        let obs = m.encoder_observation()?;
        let ps = m.state.mass().to_vec();
        let mut k = vec![0.0; na * nse * ns];
        let mut se_given_a = vec![0.0; na * nse];
        for a in 0..na {
            for se in 0..nse {
                let joint: Vec<f64> = (0..ns).map(|s| ps[s] * obs.prob(&[s, a], se)).collect();
                let total: f64 = joint.iter().sum();
                se_given_a[a * nse + se] = total;
                if total > 0.0 {
                    for s in 0..ns {
                        k[(a * nse + se) * ns + s] = joint[s] / total;
                    }
                }
            }
        }
        let mut w = vec![0.0; nx * ns * ny];
        let mut hw = vec![0.0; nx * ns];
        for x in 0..nx {
            for s in 0..ns {
                let row = m.channel.row(&[x, s]);
                for y in 0..ny {
                    w[(x * ns + s) * ny + y] = row[y];
                    if row[y] > 0.0 {
                        hw[x * ns + s] += row[y] * row[y].log2();
                    }
                }
            }
        }
        let cost = (0..na).map(|a| m.cost.get(a, 0)).collect();
        let input = m
            .input_constraint
            .as_ref()
            .map(|c| (c.weights.clone(), c.bound));
        Ok(Thm1Problem {
            na,
            nse,
            ns,
            nx,
            ny,
            ps,
            k,
            se_given_a,
            w,
            hw,
            cost,
            input,
        })
    }

    fn blocks(&self) -> usize {
        self.na * self.nse
    }

    /// `P(x, s)` from joint masses `r`.
    fn pxs(&self, r: &[f64]) -> Vec<f64> {
        let (ns, nx) = (self.ns, self.nx);
        let mut out = vec![0.0; nx * ns];
        for b in 0..self.blocks() {
            let kb = &self.k[b * ns..(b + 1) * ns];
            for x in 0..nx {
                let v = r[b * nx + x];
                if v != 0.0 {
                    for s in 0..ns {
                        out[x * ns + s] += kb[s] * v;
                    }
                }
            }
        }
        out
    }

    /// `I(X;Y|S)` from `P(x,s)`; fills `∂I/∂P(x,s)`.
    fn objective(&self, pxs: &[f64], g: &mut [f64]) -> f64 {
        let (ns, nx, ny) = (self.ns, self.nx, self.ny);
        let mut value = 0.0;
        let mut log_ratio = vec![0.0; ns * ny];
        for s in 0..ns {
            if self.ps[s] <= 0.0 {
                continue;
            }
            for y in 0..ny {
                let pys: f64 = (0..nx).map(|x| pxs[x * ns + s] * self.w[(x * ns + s) * ny + y]).sum();
                let ratio = (pys / self.ps[s]).max(1e-300);
                log_ratio[s * ny + y] = ratio.log2();
                if pys > 0.0 {
                    value -= pys * log_ratio[s * ny + y];
                }
            }
        }
        for x in 0..nx {
            for s in 0..ns {
                let i = x * ns + s;
                value += pxs[i] * self.hw[i];
                let cross: f64 = (0..ny)
                    .map(|y| self.w[i * ny + y] * log_ratio[s * ny + y])
                    .sum();
                g[i] = self.hw[i] - cross - INV_LN2;
            }
        }
        value
    }

    /// Chain rule from `∂I/∂P(x,s)` to `∂I/∂r`.
    fn grad_r(&self, g: &[f64], out: &mut [f64]) {
        let (ns, nx) = (self.ns, self.nx);
        for b in 0..self.blocks() {
            let kb = &self.k[b * ns..(b + 1) * ns];
            for x in 0..nx {
                out[b * nx + x] = (0..ns).map(|s| kb[s] * g[x * ns + s]).sum();
            }
        }
    }

    fn masses(&self, pa: &[f64]) -> Vec<f64> {
        (0..self.blocks())
            .map(|b| pa[b / self.nse] * self.se_given_a[b])
            .collect()
    }

    pub fn cost_of(&self, pa: &[f64]) -> f64 {
        pa.iter().zip(&self.cost).map(|(p, c)| p * c).sum()
    }

    /// Optimal input law for a fixed action law.
    pub fn inner(&self, pa: &[f64], warm: Option<&[f64]>, max_iter: usize, ftol: f64) -> Inner {
        let nx = self.nx;
        let rho = self.masses(pa);
        let mut poly = Polytope::new();
        for (b, &m) in rho.iter().enumerate() {
            poly = poly.block(b * nx, nx, m);
        }
        if let Some((wts, bound)) = &self.input {
            let coef: Vec<f64> = (0..rho.len() * nx).map(|i| wts[i % nx]).collect();
            if wts.iter().any(|&v| v > *bound) {
                poly = poly.halfspace(coef, *bound);
            }
        }
        let x0: Vec<f64> = (0..rho.len() * nx)
            .map(|i| {
                let b = i / nx;
                rho[b] * warm.map_or(1.0 / nx as f64, |px| px[i])
            })
            .collect();
        let mut gxs = vec![0.0; nx * self.ns];
        let run = ascend(
            x0,
            &poly,
            |r, grad| {
                let v = self.objective(&self.pxs(r), &mut gxs);
                self.grad_r(&gxs, grad);
                v
            },
            max_iter,
            ftol,
        );
        // Recover conditional rows; zero-mass rows get the best response,
        // which makes the action gradient exact at the boundary.
        self.objective(&self.pxs(&run.x), &mut gxs);
        let mut gr = vec![0.0; run.x.len()];
        self.grad_r(&gxs, &mut gr);
        let mut px = vec![0.0; run.x.len()];
        for (b, &m) in rho.iter().enumerate() {
            let row = &mut px[b * nx..(b + 1) * nx];
            if m > 1e-300 {
                for x in 0..nx {
                    row[x] = run.x[b * nx + x] / m;
                }
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= total);
            } else if self.se_given_a[b] > 0.0 {
                let best = (0..nx)
                    .max_by(|&i, &j| gr[b * nx + i].total_cmp(&gr[b * nx + j]).then(j.cmp(&i)))
                    .unwrap_or(0);
                row[best] = 1.0;
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / nx as f64);
            }
        }
        Inner {
            value: run.value,
            px,
            trace: run.trace,
        }
    }

    /// Action gradient at fixed conditional rows.
    fn action_gradient(&self, pa: &[f64], px: &[f64]) -> (f64, Vec<f64>) {
        let nx = self.nx;
        let rho = self.masses(pa);
        let r: Vec<f64> = px.iter().enumerate().map(|(i, p)| p * rho[i / nx]).collect();
        let mut gxs = vec![0.0; nx * self.ns];
        let value = self.objective(&self.pxs(&r), &mut gxs);
        let mut gr = vec![0.0; r.len()];
        self.grad_r(&gxs, &mut gr);
        let mut ga = vec![0.0; self.na];
        for b in 0..self.blocks() {
            let dot: f64 = (0..nx).map(|x| px[b * nx + x] * gr[b * nx + x]).sum();
            ga[b / self.nse] += self.se_given_a[b] * dot;
        }
        (value, ga)
    }

    fn input_load(&self, px: &[f64]) -> Option<(Vec<f64>, f64)> {
        let (wts, bound) = self.input.as_ref()?;
        let nx = self.nx;
        let mut coef = vec![0.0; self.na];
        for b in 0..self.blocks() {
            let load: f64 = (0..nx).map(|x| px[b * nx + x] * wts[x]).sum();
            coef[b / self.nse] += self.se_given_a[b] * load;
        }
        Some((coef, *bound))
    }

    /// True when `Se` carries no information about `S` under action `a`.
    pub fn uninformative(&self, a: usize) -> bool {
        (0..self.nse).all(|se| {
            let b = a * self.nse + se;
            if self.se_given_a[b] == 0.0 {
                return true;
            }
            (0..self.ns).all(|s| (self.k[b * self.ns + s] - self.ps[s]).abs() < 1e-12)
        })
    }

    fn argmax(&self, pa: &[f64], px: &[f64]) -> Argmax {
        let nx = self.nx;
        let mut rows = Vec::with_capacity(self.blocks());
        for se in 0..self.nse {
            for a in 0..self.na {
                let b = a * self.nse + se;
                rows.push(px[b * nx..(b + 1) * nx].to_vec());
            }
        }
        Argmax::Thm1 {
            pa: pa.to_vec(),
            px: rows,
        }
    }
}

struct Best {
    value: f64,
    pa: Vec<f64>,
    inner: Inner,
}

fn action_law(na: usize, lo: usize, hi: usize, t: f64) -> Vec<f64> {
    let mut pa = vec![0.0; na];
    pa[lo] = 1.0 - t;
    pa[hi] = t;
    pa
}

/// Two actions: pin the budget when the cheap action reveals nothing,
/// otherwise golden-section search on the concave value of `P(A = hi)`.
fn solve_binary(p: &Thm1Problem, gamma: f64, opts: &SolveOptions) -> Best {
    let ftol = opts.tol * 1e-3;
    let (lo, hi) = if p.cost[1] < p.cost[0] { (1, 0) } else { (0, 1) };
    let span = p.cost[hi] - p.cost[lo];
    let tmax = if span > 0.0 {
        ((gamma - p.cost[lo]) / span).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut warm: Option<Vec<f64>> = None;
    let mut eval = |t: f64| -> Best {
        let pa = action_law(p.na, lo, hi, t);
        let inner = p.inner(&pa, warm.as_deref(), opts.max_iter, ftol);
        warm = Some(inner.px.clone());
        Best {
            value: inner.value,
            pa,
            inner,
        }
    };
    if p.uninformative(lo) || tmax == 0.0 {
        return eval(tmax);
    }
    let keep = |best: &mut Best, cand: Best| {
        if cand.value > best.value {
            *best = cand;
        }
    };
    let mut best = eval(tmax);
    keep(&mut best, eval(0.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, tmax);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while b - a > 1e-7 * tmax.max(1e-9) {
        if fc.value < fd.value {
            a = c;
            c = d;
            d = a + phi * (b - a);
            let next = eval(d);
            fc = std::mem::replace(&mut fd, next);
        } else {
            b = d;
            d = c;
            c = b - phi * (b - a);
            let next = eval(c);
            fd = std::mem::replace(&mut fc, next);
        }
    }
    keep(&mut best, fc);
    keep(&mut best, fd);
    best
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize, shape: f64) -> Vec<f64> {
    let gamma = Gamma::new(shape, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..n).map(|_| gamma.sample(rng).max(1e-300)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Alternating ascent from several starts: exact inner solves for the input
/// law, projected-gradient steps for the action law.
fn solve_general(p: &Thm1Problem, gamma: f64, opts: &SolveOptions) -> (Best, Status) {
    let ftol = opts.tol * 1e-3;
    let mut poly = Polytope::new().block(0, p.na, 1.0);
    if p.cost.iter().any(|&c| c > gamma) {
        poly = poly.halfspace(p.cost.clone(), gamma);
    }
    let starts = opts.multistarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut finals: Vec<Best> = Vec::with_capacity(starts);
    for k in 0..starts {
        let raw = match k {
            0 => vec![1.0 / p.na as f64; p.na],
            _ if k % 2 == 1 => random_simplex(&mut rng, p.na, 1.0),
            _ => {
                let shape = 0.1 + rng.random::<f64>() * 0.2;
                random_simplex(&mut rng, p.na, shape)
            }
        };
        let mut pa = poly.project(&raw);
        let mut inner = p.inner(&pa, None, opts.max_iter, ftol);
        for _ in 0..500 {
            let px = inner.px.clone();
            let mut step_poly = poly.clone();
            if let Some((coef, bound)) = p.input_load(&px) {
                step_poly = step_poly.halfspace(coef, bound);
            }
            let run = ascend(
                pa.clone(),
                &step_poly,
                |a, g| {
                    let (v, ga) = p.action_gradient(a, &px);
                    g.copy_from_slice(&ga);
                    v
                },
                50,
                ftol,
            );
            let next = p.inner(&run.x, Some(&px), opts.max_iter, ftol);
            let gain = next.value - inner.value;
            if gain <= ftol {
                if gain > 0.0 {
                    pa = run.x;
                    inner = next;
                }
                break;
            }
            pa = run.x;
            inner = next;
        }
        finals.push(Best {
            value: inner.value,
            pa,
            inner,
        });
    }
    finals.sort_by(|a, b| b.value.total_cmp(&a.value));
    let status = if finals.len() < 2 || finals[0].value - finals[1].value <= 10.0 * opts.tol {
        Status::Converged
    } else {
        Status::MultistartBest
    };
    (finals.swap_remove(0), status)
}

/// Maximizes `I(X;Y|S)` under the probing budget (and the model's input
/// constraint, when present).
///
/// This is the capacity when the observation is a deterministic function of
/// state and action; with a noisy probe the receiver cannot rebuild `Se` and
/// the value only bounds the causal one from above.
pub fn solve_thm1(m: &ProbingModel, gamma: f64, opts: &SolveOptions) -> Result<SolveResult> {
    m.check_budget(gamma)?;
    let p = Thm1Problem::new(m)?;
    let (best, status) = match p.na {
        1 => {
            let pa = vec![1.0];
            let inner = p.inner(&pa, None, opts.max_iter, opts.tol * 1e-3);
            (
                Best {
                    value: inner.value,
                    pa,
                    inner,
                },
                Status::Converged,
            )
        }
        2 => (solve_binary(&p, gamma, opts), Status::Converged),
        _ => solve_general(&p, gamma, opts),
    };
    Ok(SolveResult {
        value: best.value.max(0.0),
        achieved_cost: p.cost_of(&best.pa),
        argmax: p.argmax(&best.pa, &best.inner.px),
        trace: best.inner.trace,
        status,
    })
}

/// `I(X;Y|S)` at explicit parts, evaluated on the composed joint law.
/// `px` rows are ordered by `(se, a)`, `se` outer.
pub fn thm1_value(m: &ProbingModel, pa: &[f64], px: &[Vec<f64>]) -> Result<f64> {
    thm1_joint(m, pa, px)?.conditional_mutual_information(&[roles::X], &[roles::Y], &[roles::S])
}

/// Joint law over `(A, S, Se, X, Y)` for raw parts as stored in the argmax.
pub fn thm1_joint(m: &ProbingModel, pa: &[f64], px: &[Vec<f64>]) -> Result<JointTable> {
    let pa = ProbDist::new(m.ae.clone(), pa.to_vec())?;
    let px = CondKernel::new(vec![m.se.clone(), m.ae.clone()], m.x.clone(), px.to_vec())?;
    joint_thm1(m, &pa, &px)
}

/// `P(x | s)` induced by the parts (rows indexed by `s`).
pub fn input_given_state(m: &ProbingModel, pa: &[f64], px: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let obs = m.encoder_observation()?;
    let (na, nse, nx) = (m.ae.size(), m.se.size(), m.x.size());
    if pa.len() != na || px.len() != na * nse {
        return Err(Error::Dimension("parts do not match the model".into()));
    }
    Ok((0..m.s.size())
        .map(|s| {
            let mut row = vec![0.0; nx];
            for a in 0..na {
                for se in 0..nse {
                    let weight = pa[a] * obs.prob(&[s, a], se);
                    for x in 0..nx {
                        row[x] += weight * px[se * na + a][x];
                    }
                }
            }
            row
        })
        .collect())
}
