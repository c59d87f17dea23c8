use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, ordered set of symbol labels. Indices are stable for the
/// lifetime of the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<N, I, S>(name: N, symbols: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Domain(format!("alphabet `{name}` is empty")));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Domain(format!(
                    "alphabet `{name}` repeats symbol `{s}`"
                )));
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// Symbols `0..size` labelled by their index.
    pub fn range(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|i| i.to_string()))
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::range(name, 2).expect("two symbols")
    }

    /// One-symbol alphabet, used for absent side information or actions.
    pub fn singleton(name: impl Into<String>) -> Self {
        Self::new(name, ["-"]).expect("one symbol")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Alphabet {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }

    /// Product alphabet with row-major ordering (first factor varies slowest).
    /// Symbols are joined with `|`.
    pub fn product(name: impl Into<String>, parts: &[&Alphabet]) -> Self {
        let mut symbols = vec![String::new()];
        for (k, part) in parts.iter().enumerate() {
            let mut next = Vec::with_capacity(symbols.len() * part.size());
            for prefix in &symbols {
                for s in part.symbols() {
                    if k == 0 {
                        next.push(s.clone());
                    } else {
                        next.push(format!("{prefix}|{s}"));
                    }
                }
            }
            symbols = next;
        }
        Alphabet {
            name: name.into(),
            symbols,
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {{{}}}", self.name, self.symbols.join(", "))
    }
}

/// Row-major index of a tuple over the given radices.
pub fn flat_index(radices: &[usize], tuple: &[usize]) -> usize {
    debug_assert_eq!(radices.len(), tuple.len());
    tuple
        .iter()
        .zip(radices)
        .fold(0, |acc, (&i, &r)| acc * r + i)
}

/// Inverse of [`flat_index`].
pub fn unflatten(radices: &[usize], mut index: usize, out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(Alphabet::new("S", ["0", "0"]).is_err());
        assert!(Alphabet::new("S", Vec::<String>::new()).is_err());
    }

    #[test]
    fn product_is_row_major() {
        let a = Alphabet::binary("A");
        let b = Alphabet::new("B", ["x", "y", "z"]).unwrap();
        let p = Alphabet::product("AB", &[&a, &b]);
        assert_eq!(p.size(), 6);
        assert_eq!(p.symbol(4), "1|y");
    }

    #[test]
    fn flat_index_round_trips() {
        let radices = [2, 3, 4];
        let mut t = [0; 3];
        for i in 0..24 {
            unflatten(&radices, i, &mut t);
            assert_eq!(flat_index(&radices, &t), i);
        }
    }
}
