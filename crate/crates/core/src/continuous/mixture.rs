//! Zero-mean Gaussian mixtures and their differential entropy.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default absolute accuracy of [`mixture_differential_entropy`], in bits.
pub const ENTROPY_TOL: f64 = 1e-7;

/// Half-width of the integration window in units of the largest deviation.
const WINDOW: f64 = 8.0;
const MAX_DEPTH: usize = 48;

/// `Σ w_i 𝒩(0, σ_i²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<T: Real> {
    weights: Vec<T>,
    variances: Vec<T>,
}

/// `½·log₂(2πe·σ²)`.
pub fn gaussian_entropy<T: Real>(variance: T) -> T {
    let two_pi_e = T::lit(2.0 * std::f64::consts::PI * std::f64::consts::E);
    T::lit(0.5) * (two_pi_e * variance).log2()
}

impl<T: Real> GaussianMixture<T> {
    pub fn new(weights: Vec<T>, variances: Vec<T>) -> Result<Self> {
        if weights.is_empty() || weights.len() != variances.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} variances",
                weights.len(),
                variances.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::validity_tol() {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        if variances.iter().any(|v| !v.is_finite() || *v <= T::zero()) {
            return Err(Error::Domain("variances must be positive".into()));
        }
        Ok(GaussianMixture { weights, variances })
    }

    pub fn single(variance: T) -> Result<Self> {
        Self::new(vec![T::one()], vec![variance])
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    /// `Σ w_i σ_i²`.
    pub fn variance(&self) -> T {
        self.weights.iter().zip(&self.variances).map(|(&w, &v)| w * v).sum()
    }

    pub fn density(&self, y: T) -> T {
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        self.weights
            .iter()
            .zip(&self.variances)
            .filter(|(w, _)| **w > T::zero())
            .map(|(&w, &v)| w * (-(y * y) / (v + v)).exp() / (two_pi * v).sqrt())
            .sum()
    }

    /// The common variance when every weighted component has the same one.
    fn collapsed(&self) -> Option<T> {
        let mut live = self
            .weights
            .iter()
            .zip(&self.variances)
            .filter(|(w, _)| **w > T::zero())
            .map(|(_, &v)| v);
        let first = live.next()?;
        live.all(|v| v == first).then_some(first)
    }
}

fn simpson<T: Real>(fa: T, fm: T, fb: T, h: T) -> T {
    h / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

struct Quad<'a, T: Real> {
    f: &'a dyn Fn(T) -> T,
    error: T,
    failed: bool,
}

impl<T: Real> Quad<'_, T> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: usize) -> T {
        let m = (a + b) * T::lit(0.5);
        let (lm, rm) = ((a + m) * T::lit(0.5), (m + b) * T::lit(0.5));
        let (flm, frm) = ((self.f)(lm), (self.f)(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= T::lit(15.0) * tol {
            self.error += delta.abs() / T::lit(15.0);
            return left + right + delta / T::lit(15.0);
        }
        if depth == 0 {
            self.failed = true;
            self.error += delta.abs() / T::lit(15.0);
            return left + right;
        }
        let half = tol * T::lit(0.5);
        self.step(a, m, fa, flm, fm, left, half, depth - 1)
            + self.step(m, b, fm, frm, fb, right, half, depth - 1)
    }
}

/// `−∫ g log₂ g` in bits, accurate to `tol`.
///
/// Closed form when the mixture has a single distinct variance; otherwise
/// adaptive Simpson over `±8` times the largest deviation. The Gaussian tails
/// beyond the window carry under `1e-13` bits and are neglected.
pub fn mixture_differential_entropy<T: Real>(gm: &GaussianMixture<T>, tol: T) -> Result<T> {
    if let Some(v) = gm.collapsed() {
        return Ok(gaussian_entropy(v));
    }
    let sigma = gm
        .variances
        .iter()
        .copied()
        .fold(T::zero(), T::max)
        .sqrt();
    let width = T::lit(WINDOW) * sigma;
    let integrand = |y: T| {
        let g = gm.density(y);
        if g > T::zero() {
            -g * g.log2()
        } else {
            T::zero()
        }
    };
    // Even integrand: integrate the right half on 16 panels and double.
    let panels = 16;
    let mut quad = Quad {
        f: &integrand,
        error: T::zero(),
        failed: false,
    };
    let h = width / T::lit(panels as f64);
    let panel_tol = tol / T::lit(2.0 * panels as f64);
    let mut total = T::zero();
    for k in 0..panels {
        let a = h * T::lit(k as f64);
        let b = a + h;
        let (fa, fm, fb) = (integrand(a), integrand((a + b) * T::lit(0.5)), integrand(b));
        total += quad.step(a, b, fa, fm, fb, simpson(fa, fm, fb, h), panel_tol, MAX_DEPTH);
    }
    let estimate = quad.error * T::lit(2.0);
    if quad.failed && estimate > tol {
        return Err(Error::Quadrature {
            estimate: estimate.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(total * T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(gm: &GaussianMixture<f64>, points: usize) -> f64 {
        let l = 8.0 * gm.variances().iter().copied().fold(0.0, f64::max).sqrt();
        let h = 2.0 * l / (points - 1) as f64;
        let f = |y: f64| {
            let g = gm.density(y);
            -g * g.log2()
        };
        let inner: f64 = (1..points - 1).map(|i| f(-l + i as f64 * h)).sum();
        h * (inner + 0.5 * (f(-l) + f(l)))
    }

    #[test]
    fn standard_normal() {
        let gm = GaussianMixture::single(1.0).unwrap();
        let h = mixture_differential_entropy(&gm, ENTROPY_TOL).unwrap();
        assert!((h - 2.047095).abs() < 1e-6);
    }

    #[test]
    fn identical_components_collapse() {
        let gm = GaussianMixture::new(vec![0.3, 0.7], vec![2.0, 2.0]).unwrap();
        let one = GaussianMixture::single(2.0).unwrap();
        assert_eq!(
            mixture_differential_entropy(&gm, ENTROPY_TOL).unwrap(),
            mixture_differential_entropy(&one, ENTROPY_TOL).unwrap()
        );
    }

    #[test]
    fn matches_trapezoid_oracle() {
        let gm = GaussianMixture::new(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
        let h = mixture_differential_entropy(&gm, ENTROPY_TOL).unwrap();
        let oracle = trapezoid(&gm, 1_000_000);
        assert!((h - oracle).abs() < 1e-5, "{h} vs {oracle}");
    }

    #[test]
    fn between_conditional_and_gaussian_bounds() {
        let gm = GaussianMixture::new(vec![0.2, 0.5, 0.3], vec![0.1, 1.0, 9.0]).unwrap();
        let h = mixture_differential_entropy(&gm, ENTROPY_TOL).unwrap();
        let lower: f64 = gm
            .weights()
            .iter()
            .zip(gm.variances())
            .map(|(w, v)| w * gaussian_entropy(*v))
            .sum();
        assert!(h >= lower - 1e-6);
        assert!(h <= gaussian_entropy(gm.variance()) + 1e-6);
    }

    #[test]
    fn works_in_single_precision() {
        let gm = GaussianMixture::<f32>::new(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
        let h = mixture_differential_entropy(&gm, 1e-4).unwrap();
        let g64 = GaussianMixture::<f64>::new(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
        let h64 = mixture_differential_entropy(&g64, ENTROPY_TOL).unwrap();
        assert!((h as f64 - h64).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GaussianMixture::new(vec![0.5, 0.4], vec![1.0, 1.0]).is_err());
        assert!(GaussianMixture::new(vec![1.0], vec![0.0]).is_err());
        assert!(GaussianMixture::<f64>::new(vec![], vec![]).is_err());
    }
}
