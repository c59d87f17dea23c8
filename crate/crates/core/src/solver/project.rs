//! Euclidean projection onto products of scaled simplices cut by halfspaces,
//! and projected-gradient ascent over such sets.

/// Projects `y` onto `{x ≥ 0, Σx = total}` in place (sort-based).
pub fn project_simplex(y: &mut [f64], total: f64) {
    if total <= 0.0 || y.is_empty() {
        y.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = u[0];
    let mut theta = u[0] - total;
    for (j, &uj) in u.iter().enumerate().skip(1) {
        acc += uj;
        let t = (acc - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let top = u[0];
    let original = y.to_vec();
    y.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
    // Restore the exact total lost to rounding when `total` is tiny
    // relative to the entries.
    let sum: f64 = y.iter().sum();
    if sum > 0.0 {
        y.iter_mut().for_each(|v| *v *= total / sum);
    } else {
        let ties = original.iter().filter(|&&v| v == top).count() as f64;
        for (v, &o) in y.iter_mut().zip(&original) {
            *v = if o == top { total / ties } else { 0.0 };
        }
    }
}

/// `{x : x_block ∈ total·Δ for every block, c_k·x ≤ b_k}`.
#[derive(Debug, Clone, Default)]
pub struct Polytope {
    blocks: Vec<(usize, usize, f64)>,
    halfspaces: Vec<(Vec<f64>, f64)>,
}

const BISECTIONS: usize = 200;
const DYKSTRA_CYCLES: usize = 2000;

impl Polytope {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a block of `len` coordinates starting at `start` summing to `total`.
    pub fn block(mut self, start: usize, len: usize, total: f64) -> Self {
        self.blocks.push((start, len, total));
        self
    }

    pub fn halfspace(mut self, coef: Vec<f64>, bound: f64) -> Self {
        self.halfspaces.push((coef, bound));
        self
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.0 + b.1).max().unwrap_or(0)
    }

    fn project_blocks(&self, y: &mut [f64]) {
        self.project_blocks_scaled(y, 1.0);
    }

    fn project_blocks_scaled(&self, y: &mut [f64], scale: f64) {
        for &(start, len, total) in &self.blocks {
            project_simplex(&mut y[start..start + len], total * scale);
        }
    }

    fn dot(c: &[f64], x: &[f64]) -> f64 {
        c.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Projection onto the blocks intersected with one halfspace, by
    /// bisection on its multiplier.
    fn project_one(&self, y: &[f64], coef: &[f64], bound: f64) -> Vec<f64> {
        // For large multipliers use P_t(y - νc) = ν·P_{t/ν}(y/ν - c), which
        // keeps the sort-based projection well conditioned.
        let at = |nu: f64| {
            let scale = nu.max(1.0);
            let mut x: Vec<f64> = y.iter().zip(coef).map(|(v, c)| v / scale - nu / scale * c).collect();
            self.project_blocks_scaled(&mut x, 1.0 / scale);
            x.iter_mut().for_each(|v| *v *= scale);
            x
        };
        let x0 = at(0.0);
        if Self::dot(coef, &x0) <= bound {
            return x0;
        }
        let mut hi = 1.0;
        let mut xh = at(hi);
        let mut doublings = 0;
        while Self::dot(coef, &xh) > bound && doublings < 200 {
            hi *= 2.0;
            xh = at(hi);
            doublings += 1;
        }
        let mut lo = 0.0;
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let xm = at(mid);
            if Self::dot(coef, &xm) > bound {
                lo = mid;
            } else {
                hi = mid;
                xh = xm;
            }
        }
        xh
    }

    fn project_halfspace(x: &mut [f64], coef: &[f64], bound: f64) {
        let v = Self::dot(coef, x) - bound;
        if v > 0.0 {
            let nn = Self::dot(coef, coef);
            if nn > 0.0 {
                x.iter_mut().zip(coef).for_each(|(xi, c)| *xi -= v / nn * c);
            }
        }
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        match self.halfspaces.len() {
            0 => {
                let mut x = y.to_vec();
                self.project_blocks(&mut x);
                x
            }
            1 => self.project_one(y, &self.halfspaces[0].0, self.halfspaces[0].1),
            _ => self.dykstra(y),
        }
    }

    /// Dykstra's alternating projections between (blocks ∩ first halfspace)
    /// and each remaining halfspace.
    fn dykstra(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let sets = self.halfspaces.len();
        let mut x = y.to_vec();
        let mut incr = vec![vec![0.0; n]; sets];
        for _ in 0..DYKSTRA_CYCLES {
            let before = x.clone();
            for (k, inc) in incr.iter_mut().enumerate() {
                let z: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
                let p = if k == 0 {
                    self.project_one(&z, &self.halfspaces[0].0, self.halfspaces[0].1)
                } else {
                    let mut p = z.clone();
                    Self::project_halfspace(&mut p, &self.halfspaces[k].0, self.halfspaces[k].1);
                    p
                };
                for i in 0..n {
                    inc[i] = z[i] - p[i];
                }
                x = p;
            }
            let moved = x
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if moved < 1e-15 {
                break;
            }
        }
        x
    }

    /// Largest halfspace violation of `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|(c, b)| Self::dot(c, x) - b)
            .fold(0.0, f64::max)
    }
}

/// Result of a projected-gradient run.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub trace: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;

/// Projected-gradient ascent with Armijo backtracking from a unit step.
/// `f(x, grad)` returns the objective and fills the gradient.
pub fn ascend<F>(x0: Vec<f64>, poly: &Polytope, mut f: F, max_iter: usize, ftol: f64) -> Ascent
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = poly.project(&x0);
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut trace = vec![fx];
    let mut stalls = 0;
    for _ in 0..max_iter {
        let mut eta = 1.0;
        let mut accepted = None;
        while eta > 1e-18 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + eta * b).collect();
            let xn = poly.project(&y);
            let dir: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if dir <= 0.0 {
                break;
            }
            let fn_ = f(&xn, &mut scratch);
            if fn_ >= fx + ARMIJO * dir {
                accepted = Some((xn, fn_));
                break;
            }
            eta *= SHRINK;
        }
        let Some((xn, fn_)) = accepted else {
            break;
        };
        let gain = fn_ - fx;
        x = xn;
        fx = fn_;
        std::mem::swap(&mut g, &mut scratch);
        trace.push(fx);
        if gain < ftol {
            stalls += 1;
            if stalls >= 5 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ascent { x, value: fx, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simplex_projection_cases() {
        let mut y = vec![0.2, 0.3, 0.5];
        project_simplex(&mut y, 1.0);
        assert_eq!(y, vec![0.2, 0.3, 0.5]);
        let mut y = vec![2.0, 0.0];
        project_simplex(&mut y, 1.0);
        assert_eq!(y, vec![1.0, 0.0]);
        let mut y = vec![1.0, 1.0];
        project_simplex(&mut y, 0.5);
        assert_eq!(y, vec![0.25, 0.25]);
    }

    #[test]
    fn halfspace_binds() {
        let p = Polytope::new().block(0, 2, 1.0).halfspace(vec![0.0, 1.0], 0.3);
        let x = p.project(&[0.0, 1.0]);
        assert!((x[1] - 0.3).abs() < 1e-12 && (x[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn ascent_on_concave_quadratic() {
        // max -(x0-0.9)^2 - (x1-0.1)^2 - x2^2 on the simplex with x0 <= 0.5
        let p = Polytope::new().block(0, 3, 1.0).halfspace(vec![1.0, 0.0, 0.0], 0.5);
        let target = [0.9, 0.1, 0.0];
        let run = ascend(
            vec![1.0 / 3.0; 3],
            &p,
            |x, g| {
                let mut v = 0.0;
                for i in 0..3 {
                    g[i] = -2.0 * (x[i] - target[i]);
                    v -= (x[i] - target[i]).powi(2);
                }
                v
            },
            1000,
            1e-15,
        );
        assert!((run.x[0] - 0.5).abs() < 1e-6, "{:?}", run.x);
        assert!(run.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(
            y in proptest::collection::vec(-2.0f64..2.0, 6),
            c in proptest::collection::vec(0.0f64..1.0, 6),
            b in 0.2f64..1.0,
        ) {
            let p = Polytope::new().block(0, 3, 1.0).block(3, 3, 0.5).halfspace(c.clone(), b);
            let x = p.project(&y);
            let s0: f64 = x[..3].iter().sum();
            let s1: f64 = x[3..].iter().sum();
            prop_assert!((s0 - 1.0).abs() < 1e-9 && (s1 - 0.5).abs() < 1e-9);
            prop_assert!(x.iter().all(|&v| v >= 0.0));
            let min_cost = c[..3].iter().cloned().fold(f64::INFINITY, f64::min)
                + 0.5 * c[3..].iter().cloned().fold(f64::INFINITY, f64::min);
            if min_cost < b - 1e-6 {
                prop_assert!(p.violation(&x) < 1e-9);
                let again = p.project(&x);
                for (u, v) in again.iter().zip(&x) {
                    prop_assert!((u - v).abs() < 1e-7);
                }
            }
        }
    }
}
