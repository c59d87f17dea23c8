//! I.i.d. draws from a joint table and plug-in information estimates.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{unflatten, Axis};
use crate::JointTable;

/// Bootstrap resamples behind [`CmiEstimate::stderr`].
pub const BOOTSTRAP: usize = 100;

/// `n` samples stored column-wise, one column per axis of the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub axes: Vec<Axis>,
    pub columns: Vec<Vec<u16>>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, role: &str) -> Result<&[u16]> {
        self.axes
            .iter()
            .position(|a| a.role == role)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownAxis(role.to_string()))
    }

    /// Empirical joint over all axes.
    pub fn empirical(&self) -> Result<JointTable> {
        let counts = self.counts();
        let n = self.len() as f64;
        JointTable::new(self.axes.clone(), counts.iter().map(|&c| c as f64 / n).collect())
    }

    fn counts(&self) -> Vec<u64> {
        let radices: Vec<usize> = self.axes.iter().map(|a| a.alphabet.size()).collect();
        let mut counts = vec![0u64; radices.iter().product()];
        for i in 0..self.len() {
            let flat = self
                .columns
                .iter()
                .zip(&radices)
                .fold(0, |acc, (c, &r)| acc * r + c[i] as usize);
            counts[flat] += 1;
        }
        counts
    }
}

/// `n` i.i.d. draws from `j`, reproducible from `seed`.
pub fn sample_joint(j: &JointTable, n: usize, seed: u64) -> Result<SampleBatch> {
    let radices = j.radices();
    if radices.iter().any(|&r| r > u16::MAX as usize) {
        return Err(Error::Domain("alphabet too large to sample".into()));
    }
    let mut columns = vec![Vec::with_capacity(n); j.rank()];
    if n > 0 {
        let index = WeightedIndex::new(j.mass()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tuple = vec![0; j.rank()];
        for _ in 0..n {
            unflatten(&radices, index.sample(&mut rng), &mut tuple);
            for (c, &t) in columns.iter_mut().zip(&tuple) {
                c.push(t as u16);
            }
        }
    }
    Ok(SampleBatch {
        axes: j.axes().to_vec(),
        columns,
        seed,
    })
}

/// Plug-in estimate of `I(X;Y|Z)` with its first-order bias correction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmiEstimate {
    /// Corrected estimate in bits.
    pub estimate: f64,
    pub plug_in: f64,
    /// Added to the plug-in value: `(m_xz + m_yz − m_xyz − m_z) / (2n ln 2)`
    /// with `m` the occupied cell counts.
    pub bias_correction: f64,
    /// Bootstrap standard deviation of the corrected estimate.
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

fn occupied(j: &JointTable, of: &[&str]) -> Result<f64> {
    if of.is_empty() {
        return Ok(1.0);
    }
    Ok(j.marginal(of)?.mass().iter().filter(|&&p| p > 0.0).count() as f64)
}

fn corrected(j: &JointTable, x: &[&str], y: &[&str], given: &[&str], n: f64) -> Result<(f64, f64)> {
    let plug = j.conditional_mutual_information(x, y, given)?;
    let xz: Vec<&str> = x.iter().chain(given).copied().collect();
    let yz: Vec<&str> = y.iter().chain(given).copied().collect();
    let all: Vec<&str> = xz.iter().chain(y).copied().collect();
    let cells = occupied(j, &xz)? + occupied(j, &yz)? - occupied(j, &all)? - occupied(j, given)?;
    Ok((plug, cells / (2.0 * n * std::f64::consts::LN_2)))
}

/// `I(X;Y|Z)` from samples; the standard error comes from [`BOOTSTRAP`]
/// multinomial resamples of the empirical cell counts.
pub fn empirical_cmi(b: &SampleBatch, x: &[&str], y: &[&str], given: &[&str]) -> Result<CmiEstimate> {
    if b.is_empty() {
        return Err(Error::Domain("empty sample batch".into()));
    }
    let n = b.len();
    let nf = n as f64;
    let table = b.empirical()?;
    let (plug_in, bias_correction) = corrected(&table, x, y, given, nf)?;

    let counts = b.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    rng.set_stream(1);
    let mut reps = Vec::with_capacity(BOOTSTRAP);
    let mut mass = vec![0.0; counts.len()];
    for _ in 0..BOOTSTRAP {
        // Multinomial(n, p̂) drawn as a chain of conditional binomials.
        let mut left = n as u64;
        let mut rest = 1.0;
        for (k, &c) in counts.iter().enumerate() {
            let p = c as f64 / nf;
            let draw = if left == 0 || p <= 0.0 {
                0
            } else if p >= rest {
                left
            } else {
                Binomial::new(left, (p / rest).min(1.0))
                    .map_err(|e| Error::Domain(e.to_string()))?
                    .sample(&mut rng)
            };
            mass[k] = draw as f64 / nf;
            left -= draw;
            rest -= p;
        }
        let t = JointTable::new(b.axes.clone(), mass.clone())?;
        let (p, c) = corrected(&t, x, y, given, nf)?;
        reps.push(p + c);
    }
    let mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps.len() - 1) as f64;
    Ok(CmiEstimate {
        estimate: plug_in + bias_correction,
        plug_in,
        bias_correction,
        stderr: var.sqrt(),
        n,
        seed: b.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;

    fn table(mass: Vec<f64>) -> JointTable {
        JointTable::new(
            vec![
                Axis::new("X", Alphabet::binary("X")),
                Axis::new("Y", Alphabet::binary("Y")),
            ],
            mass,
        )
        .unwrap()
    }

    #[test]
    fn point_mass_rows_identical() {
        let b = sample_joint(&table(vec![0.0, 0.0, 1.0, 0.0]), 50, 3).unwrap();
        assert!(b.column("X").unwrap().iter().all(|&v| v == 1));
        assert!(b.column("Y").unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn empty_batch() {
        let b = sample_joint(&table(vec![0.25; 4]), 0, 3).unwrap();
        assert!(b.is_empty());
        assert!(empirical_cmi(&b, &["X"], &["Y"], &[]).is_err());
    }

    #[test]
    fn reproducible() {
        let t = table(vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(sample_joint(&t, 1000, 9).unwrap(), sample_joint(&t, 1000, 9).unwrap());
    }

    #[test]
    fn independent_axes_near_zero() {
        let b = sample_joint(&table(vec![0.12, 0.28, 0.18, 0.42]), 20_000, 5).unwrap();
        let e = empirical_cmi(&b, &["X"], &["Y"], &[]).unwrap();
        assert!(e.estimate.abs() <= 3.0 * e.stderr + 1e-4, "{e:?}");
    }

    #[test]
    fn copy_gives_entropy() {
        let b = sample_joint(&table(vec![0.3, 0.0, 0.0, 0.7]), 20_000, 5).unwrap();
        let e = empirical_cmi(&b, &["X"], &["Y"], &[]).unwrap();
        let h = crate::prob::binary_entropy(0.3).unwrap();
        assert!((e.estimate - h).abs() <= 3.0 * e.stderr + 1e-3, "{e:?}");
    }
}
