use serde::Serialize;

use super::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_simplex<T: Real>(mass: &[T], what: &str) -> Result<()> {
    let mut total = T::zero();
    for (i, &p) in mass.iter().enumerate() {
        if !(p >= T::zero() && p <= T::one() + T::validity_tol()) {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} = {p} outside [0,1]"
            )));
        }
        total += p;
    }
    if (total - T::one()).abs() > T::validity_tol() {
        return Err(Error::InvalidDistribution(format!(
            "{what}: mass sums to {total}"
        )));
    }
    Ok(())
}

/// Probability mass function over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbDist<T> {
    alphabet: Alphabet,
    mass: Vec<T>,
}

impl<T: Real> ProbDist<T> {
    pub fn new(alphabet: Alphabet, mass: Vec<T>) -> Result<Self> {
        if mass.len() != alphabet.size() {
            return Err(Error::Dimension(format!(
                "{} masses for alphabet `{}` of size {}",
                mass.len(),
                alphabet.name(),
                alphabet.size()
            )));
        }
        check_simplex(&mass, alphabet.name())?;
        Ok(ProbDist { alphabet, mass })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(alphabet: Alphabet, weights: Vec<T>) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) || weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with positive total".into(),
            ));
        }
        Self::new(alphabet, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        let p = T::one() / T::from_usize(n).unwrap();
        ProbDist {
            alphabet,
            mass: vec![p; n],
        }
    }

    pub fn point(alphabet: Alphabet, index: usize) -> Result<Self> {
        if index >= alphabet.size() {
            return Err(Error::Dimension(format!("point mass at {index}")));
        }
        let mut mass = vec![T::zero(); alphabet.size()];
        mass[index] = T::one();
        Ok(ProbDist { alphabet, mass })
    }

    pub fn bernoulli(alphabet: Alphabet, p_one: T) -> Result<Self> {
        if alphabet.size() != 2 {
            return Err(Error::Dimension("bernoulli needs a binary alphabet".into()));
        }
        Self::new(alphabet, vec![T::one() - p_one, p_one])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn prob(&self, index: usize) -> T {
        self.mass[index]
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// Stochastic matrix: one output distribution per tuple of input symbols.
/// Rows are stored in row-major order over the input alphabets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondKernel<T> {
    inputs: Vec<Alphabet>,
    output: Alphabet,
    rows: Vec<Vec<T>>,
}

impl<T: Real> CondKernel<T> {
    pub fn new(inputs: Vec<Alphabet>, output: Alphabet, rows: Vec<Vec<T>>) -> Result<Self> {
        let expected: usize = inputs.iter().map(Alphabet::size).product();
        if rows.len() != expected {
            return Err(Error::Dimension(format!(
                "kernel into `{}` has {} rows, expected {}",
                output.name(),
                rows.len(),
                expected
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != output.size() {
                return Err(Error::Dimension(format!(
                    "kernel row {r} has {} entries, expected {}",
                    row.len(),
                    output.size()
                )));
            }
            check_simplex(row, &format!("kernel into `{}` row {r}", output.name()))?;
        }
        Ok(CondKernel {
            inputs,
            output,
            rows,
        })
    }

    /// Builds a kernel from a function of the input tuple.
    pub fn from_fn<F>(inputs: Vec<Alphabet>, output: Alphabet, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<T>,
    {
        let radices: Vec<usize> = inputs.iter().map(Alphabet::size).collect();
        let count: usize = radices.iter().product();
        let mut tuple = vec![0; radices.len()];
        let mut rows = Vec::with_capacity(count);
        for i in 0..count {
            super::alphabet::unflatten(&radices, i, &mut tuple);
            rows.push(f(&tuple));
        }
        Self::new(inputs, output, rows)
    }

    /// Deterministic kernel `output = map(inputs)`.
    pub fn deterministic<F>(inputs: Vec<Alphabet>, output: Alphabet, mut map: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> usize,
    {
        let n = output.size();
        Self::from_fn(inputs, output, |t| {
            let mut row = vec![T::zero(); n];
            row[map(t)] = T::one();
            row
        })
    }

    pub fn inputs(&self) -> &[Alphabet] {
        &self.inputs
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn radices(&self) -> Vec<usize> {
        self.inputs.iter().map(Alphabet::size).collect()
    }

    pub fn row_index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.inputs.len());
        tuple
            .iter()
            .zip(&self.inputs)
            .fold(0, |acc, (&i, a)| acc * a.size() + i)
    }

    pub fn row(&self, tuple: &[usize]) -> &[T] {
        &self.rows[self.row_index(tuple)]
    }

    pub fn prob(&self, tuple: &[usize], out: usize) -> T {
        self.row(tuple)[out]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.iter().filter(|p| **p > T::zero()).count() == 1)
    }
}
