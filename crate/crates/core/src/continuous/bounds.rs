//! Power-splitting lower bounds for the Gaussian examples.

use rayon::prelude::*;

use super::mixture::{gaussian_entropy, mixture_differential_entropy, GaussianMixture, ENTROPY_TOL};
use crate::error::{Error, Result};
use crate::solver::{Argmax, SolveResult, Status};

/// Default number of grid points per free power.
pub const POWER_GRID: usize = 201;

/// `½·log₂(1 + snr)`.
pub fn awgn_capacity(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("negative snr {snr}")));
    }
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("probe budget {gamma} outside [0, 1]")));
    }
    Ok(())
}

fn check_power(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("{name} must be a nonnegative number, got {v}")));
    }
    Ok(())
}

/// Additive interference channel `Y = X + S + Z` with probed interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirtyPaperParams {
    pub p: f64,
    pub q: f64,
    pub n: f64,
    pub gamma: f64,
}

impl DirtyPaperParams {
    pub fn validate(&self) -> Result<()> {
        check_power("P", self.p)?;
        check_power("Q", self.q)?;
        check_power("N", self.n)?;
        if self.n == 0.0 {
            return Err(Error::Domain("noise power must be positive".into()));
        }
        check_gamma(self.gamma)
    }

    /// Value at unprobed power `p1` and probed power `p2`.
    fn objective(&self, p1: f64, p2: f64) -> Result<f64> {
        let g = self.gamma;
        let (v0, v1) = (p1 + self.q + self.n, p2 + self.q + self.n);
        let mix = GaussianMixture::new(vec![1.0 - g, g], vec![v0, v1])?;
        let gain = mixture_differential_entropy(&mix, ENTROPY_TOL)?
            - (1.0 - g) * gaussian_entropy(v0)
            - g * gaussian_entropy(v1);
        Ok(gain + (1.0 - g) * awgn_capacity(p1 / (self.q + self.n))? + g * awgn_capacity(p2 / self.n)?)
    }
}

fn best_of(points: Vec<(Vec<f64>, Result<f64>)>) -> Result<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x, v) in points {
        let v = v?;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((x, v));
        }
    }
    best.ok_or_else(|| Error::Domain("empty power grid".into()))
}

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    crate::solver::linear_grid(lo, hi, count.max(2))
}

fn powers(names: &[&str], values: Vec<f64>, value: f64, gamma: f64) -> SolveResult {
    SolveResult {
        value,
        argmax: Argmax::Powers {
            names: names.iter().map(|s| s.to_string()).collect(),
            values,
        },
        achieved_cost: gamma,
        trace: vec![value],
        status: Status::Oracle,
    }
}

/// Best power split over `(1−Γ)P₁ + ΓP₂ = P` on a grid of `points` values of
/// `P₁`, refined once around the incumbent.
pub fn dirty_paper_lower(p: &DirtyPaperParams, points: usize) -> Result<SolveResult> {
    p.validate()?;
    let g = p.gamma;
    let names = ["P1", "P2"];
    if g == 0.0 {
        let v = awgn_capacity(p.p / (p.q + p.n))?;
        return Ok(powers(&names, vec![p.p, 0.0], v, g));
    }
    if g == 1.0 {
        let v = awgn_capacity(p.p / p.n)?;
        return Ok(powers(&names, vec![0.0, p.p], v, g));
    }
    let hi = p.p / (1.0 - g);
    let probed = |p1: f64| ((p.p - (1.0 - g) * p1) / g).max(0.0);
    let eval = |xs: Vec<f64>| -> Result<(Vec<f64>, f64)> {
        best_of(
            xs.into_par_iter()
                .map(|p1| (vec![p1], p.objective(p1, probed(p1))))
                .collect(),
        )
    };
    let mut coarse = grid(0.0, hi, points);
    coarse.push(p.p);
    let (x, _) = eval(coarse)?;
    let step = hi / (points.max(2) - 1) as f64;
    let (x, v) = eval(grid((x[0] - step).max(0.0), (x[0] + step).min(hi), points))
        .and_then(|fine| {
            let incumbent = (x.clone(), p.objective(x[0], probed(x[0]))?);
            Ok(if fine.1 > incumbent.1 { fine } else { incumbent })
        })?;
    Ok(powers(&names, vec![x[0], probed(x[0])], v, g))
}

/// Two equiprobable fading gains, known at the receiver and probed by the
/// transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub p: f64,
    pub n: f64,
    pub b: f64,
    pub g1: f64,
    pub g2: f64,
    pub gamma: f64,
}

impl FadingParams {
    pub fn snr1(&self) -> f64 {
        self.p * self.g1 / (self.n * self.b)
    }

    pub fn snr2(&self) -> f64 {
        self.p * self.g2 / (self.n * self.b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("P", self.p), ("N", self.n), ("B", self.b), ("g1", self.g1), ("g2", self.g2)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        check_gamma(self.gamma)?;
        let (s1, s2) = (self.snr1(), self.snr2());
        if s1 >= s2 / (1.0 + 2.0 * s2) {
            return Err(Error::Domain(format!(
                "weak-gain snr {s1} must be below {}",
                s2 / (1.0 + 2.0 * s2)
            )));
        }
        Ok(())
    }

    /// Rate when only the receiver knows the gain.
    pub fn unprobed(&self) -> f64 {
        0.5 * self.b * ((1.0 + self.snr1()).log2() + (1.0 + self.snr2()).log2())
    }

    /// Rate with the gain always known at the transmitter.
    pub fn fully_probed(&self) -> f64 {
        0.5 * self.b * (1.0 + 2.0 * self.snr2()).log2()
    }

    fn output_entropy(&self, gain: f64, blind: f64, informed: f64) -> Result<f64> {
        let nb = self.n * self.b;
        let mix = GaussianMixture::new(
            vec![1.0 - self.gamma, self.gamma],
            vec![nb + blind * gain, nb + informed * gain],
        )?;
        mixture_differential_entropy(&mix, ENTROPY_TOL)
    }

    fn objective(&self, blind: f64, p1: f64, p2: f64) -> Result<f64> {
        let h1 = self.output_entropy(self.g1, blind, p1)?;
        let h2 = self.output_entropy(self.g2, blind, p2)?;
        Ok(2.0 * self.b * (0.5 * (h1 + h2) - gaussian_entropy(self.n * self.b)))
    }
}

/// Best split over `(1−Γ)P∗ + (Γ/2)(P₁ + P₂) = P`: a grid over `(P∗, P₁)`
/// with `P₂` fixed by the budget, refined once around the incumbent.
pub fn fading_lower(p: &FadingParams, points: usize) -> Result<SolveResult> {
    p.validate()?;
    let g = p.gamma;
    let names = ["P*", "P1", "P2"];
    if g == 0.0 {
        return Ok(powers(&names, vec![p.p, p.p, p.p], p.unprobed(), g));
    }
    // The share left for the probed slots once `P∗` is fixed.
    let rest = |blind: f64| (2.0 * (p.p - (1.0 - g) * blind) / g).max(0.0);
    let blind_hi = if g == 1.0 { 0.0 } else { p.p / (1.0 - g) };
    let eval = |pairs: Vec<(f64, f64)>| -> Result<(Vec<f64>, f64)> {
        best_of(
            pairs
                .into_par_iter()
                .map(|(blind, t)| {
                    let r = rest(blind);
                    let (p1, p2) = (t * r, (1.0 - t) * r);
                    (vec![blind, p1, p2], p.objective(blind, p1, p2))
                })
                .collect(),
        )
    };
    // `t` is the fraction of the probed share spent on the weak gain.
    let mut blinds = if g == 1.0 { vec![0.0] } else { grid(0.0, blind_hi, points) };
    if g < 1.0 {
        blinds.push(p.p);
    }
    let ts = grid(0.0, 1.0, points);
    let pairs: Vec<(f64, f64)> = blinds
        .iter()
        .flat_map(|&b| ts.iter().map(move |&t| (b, t)))
        .collect();
    let (x, v) = eval(pairs)?;
    let r = rest(x[0]);
    let t0 = if r > 0.0 { x[1] / r } else { 0.0 };
    let db = blind_hi / (points.max(2) - 1) as f64;
    let dt = 1.0 / (points.max(2) - 1) as f64;
    let fine = 41;
    let fine_blinds = if g == 1.0 {
        vec![0.0]
    } else {
        grid((x[0] - db).max(0.0), (x[0] + db).min(blind_hi), fine)
    };
    let fine_ts = grid((t0 - dt).max(0.0), (t0 + dt).min(1.0), fine);
    let pairs: Vec<(f64, f64)> = fine_blinds
        .iter()
        .flat_map(|&b| fine_ts.iter().map(move |&t| (b, t)))
        .collect();
    let (xf, vf) = eval(pairs)?;
    let (x, v) = if vf > v { (xf, vf) } else { (x, v) };
    Ok(powers(&names, x, v, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dpc(gamma: f64) -> DirtyPaperParams {
        DirtyPaperParams {
            p: 1.0,
            q: 1.0,
            n: 1.0,
            gamma,
        }
    }

    fn fading(gamma: f64) -> FadingParams {
        FadingParams {
            p: 1.0,
            n: 1.0,
            b: 1.0,
            g1: 0.01,
            g2: 1.0,
            gamma,
        }
    }

    #[test]
    fn awgn_values() {
        assert_eq!(awgn_capacity(0.0).unwrap(), 0.0);
        assert!((awgn_capacity(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((awgn_capacity(0.5).unwrap() - 0.292481).abs() < 1e-6);
        assert!(awgn_capacity(-1.0).is_err());
    }

    #[test]
    fn dirty_paper_endpoints() {
        assert_eq!(dirty_paper_lower(&dpc(1.0), POWER_GRID).unwrap().value, 0.5);
        assert!((dirty_paper_lower(&dpc(0.0), POWER_GRID).unwrap().value - 0.292481).abs() < 1e-5);
    }

    #[test]
    fn dirty_paper_beats_time_sharing_midway() {
        let v = dirty_paper_lower(&dpc(0.5), 51).unwrap().value;
        let line = 0.5 * (awgn_capacity(0.5).unwrap() + 0.5);
        assert!((line - 0.396240).abs() < 1e-6);
        assert!(v >= line - 1e-6);
    }

    #[test]
    fn fading_endpoints() {
        assert!((fading_lower(&fading(0.0), 21).unwrap().value - 0.507178).abs() < 1e-4);
        assert!((fading_lower(&fading(1.0), 21).unwrap().value - 0.792481).abs() < 1e-4);
    }

    #[test]
    fn fading_regime_enforced() {
        let mut f = fading(0.5);
        f.g1 = 0.5;
        assert!(fading_lower(&f, 11).is_err());
    }
}
