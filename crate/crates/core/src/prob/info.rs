//! Entropy in bits over finite alphabets.

use super::dist::ProbDist;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `-p log2 p` with `0 log 0 = 0`; masses below the log floor count as zero.
#[inline]
pub fn neg_xlog2x<T: Real>(p: T) -> T {
    if p <= T::log_floor() {
        T::zero()
    } else {
        -p * p.log2()
    }
}

/// Binary entropy function `h2(p)` in bits.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("binary entropy of {p}")));
    }
    Ok(neg_xlog2x(p) + neg_xlog2x(T::one() - p))
}

/// Shannon entropy of a mass vector in bits.
pub fn entropy_of<T: Real>(mass: &[T]) -> T {
    mass.iter().map(|&p| neg_xlog2x(p)).sum()
}

pub fn entropy<T: Real>(d: &ProbDist<T>) -> T {
    entropy_of(d.mass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.2f64).unwrap() - 0.721928).abs() < 1e-6);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
        assert!((binary_entropy(0.2f32).unwrap() - 0.721928).abs() < 1e-5);
    }

    #[test]
    fn entropy_values() {
        let a = Alphabet::range("Z", 4).unwrap();
        assert_eq!(entropy(&ProbDist::<f64>::uniform(a.clone())), 2.0);
        assert_eq!(entropy(&ProbDist::<f64>::point(a, 2).unwrap()), 0.0);
        let b = ProbDist::new(Alphabet::binary("B"), vec![0.25f64, 0.75]).unwrap();
        assert!((entropy(&b) - 0.811278).abs() < 1e-6);
    }
}
