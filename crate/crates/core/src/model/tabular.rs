use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{check_indices, check_permutation, BlockTable};
use crate::alphabet::{Dyad, DyadAlphabet};
use crate::math::ln;
use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Unconstrained block model: one probability vector over `𝒟` per block pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularBlockModel {
    alphabet: DyadAlphabet,
    pi: BlockTable,
}

impl TabularBlockModel {
    /// Validates normalization, range and transpose symmetry of a full `(k, l, d)` table.
    pub fn new(alphabet: DyadAlphabet, pi: BlockTable) -> Result<Self> {
        if pi.dyads() != alphabet.size() {
            return Err(Error::DimensionMismatch(format!(
                "table has {} dyad values, alphabet has {}",
                pi.dyads(),
                alphabet.size()
            )));
        }
        let k = pi.components();
        if k == 0 {
            return Err(Error::InvalidProbabilities("K must be at least 1".into()));
        }
        for a in 0..k {
            for b in 0..k {
                let block = pi.block(a, b);
                if let Some(x) = block.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(Error::InvalidProbabilities(format!(
                        "entry {x} in block ({a}, {b}) is outside [0, 1]"
                    )));
                }
                let s: f64 = block.iter().sum();
                if (s - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::InvalidProbabilities(format!(
                        "block ({a}, {b}) sums to {s}"
                    )));
                }
                for d in alphabet.iter() {
                    let mirrored = pi.get(b, a, alphabet.transpose(d));
                    if (pi.get(a, b, d) - mirrored).abs() > SUM_TOLERANCE {
                        return Err(Error::InvalidProbabilities(format!(
                            "block ({a}, {b}) is not the transpose of block ({b}, {a})"
                        )));
                    }
                }
            }
        }
        Ok(Self { alphabet, pi })
    }

    /// Builds the table from the blocks `k ≤ l`; blocks `k > l` are mirrored.
    pub fn from_upper<F>(k: usize, alphabet: DyadAlphabet, mut block: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<f64>,
    {
        let size = alphabet.size();
        let mut pi = BlockTable::filled(k, size, 0.0);
        for a in 0..k {
            for b in a..k {
                let probs = block(a, b);
                if probs.len() != size {
                    return Err(Error::DimensionMismatch(format!(
                        "block ({a}, {b}) has {} entries, expected {size}",
                        probs.len()
                    )));
                }
                for d in alphabet.iter() {
                    pi.set(a, b, d, probs[d.index()]);
                    pi.set(b, a, alphabet.transpose(d), probs[d.index()]);
                }
            }
        }
        Self::new(alphabet, pi)
    }

    pub fn uniform(k: usize, alphabet: DyadAlphabet) -> Self {
        let size = alphabet.size();
        Self { pi: BlockTable::filled(k, size, 1.0 / size as f64), alphabet }
    }

    /// Skips validation; callers guarantee the table is a valid symmetric model.
    pub(crate) fn from_table_unchecked(alphabet: DyadAlphabet, pi: BlockTable) -> Self {
        Self { alphabet, pi }
    }

    pub fn components(&self) -> usize {
        self.pi.components()
    }

    pub fn alphabet(&self) -> &DyadAlphabet {
        &self.alphabet
    }

    pub fn table(&self) -> &BlockTable {
        &self.pi
    }

    pub fn prob(&self, k: usize, l: usize, d: Dyad) -> f64 {
        self.pi.get(k, l, d)
    }

    pub fn dyad_log_prob(&self, k: usize, l: usize, d: Dyad) -> Result<f64> {
        check_indices(self.components(), self.alphabet.size(), k, l, d)?;
        Ok(ln(self.pi.get(k, l, d)))
    }

    pub fn log_table(&self) -> BlockTable {
        let data = self.pi.as_slice().iter().map(|&p| ln(p)).collect();
        BlockTable { k: self.pi.k, d: self.pi.d, data }
    }

    pub(crate) fn upper_entries(&self) -> Vec<f64> {
        let k = self.components();
        let mut out = Vec::with_capacity(k * (k + 1) / 2 * self.alphabet.size());
        for a in 0..k {
            for b in a..k {
                out.extend_from_slice(self.pi.block(a, b));
            }
        }
        out
    }

    pub(crate) fn upper_entry_names(&self) -> Vec<String> {
        let k = self.components();
        let mut out = Vec::new();
        for a in 0..k {
            for b in a..k {
                for d in self.alphabet.iter() {
                    let (x, y) = self.alphabet.labels(d);
                    if self.alphabet.is_directed() {
                        out.push(format!("pi[{},{}][{x},{y}]", a + 1, b + 1));
                    } else {
                        out.push(format!("pi[{},{}][{x}]", a + 1, b + 1));
                    }
                }
            }
        }
        out
    }

    pub fn permute_components(&self, order: &[usize]) -> Result<Self> {
        let k = self.components();
        check_permutation(order, k)?;
        let mut pi = BlockTable::filled(k, self.alphabet.size(), 0.0);
        for a in 0..k {
            for b in 0..k {
                pi.block_mut(a, b).copy_from_slice(self.pi.block(order[a], order[b]));
            }
        }
        Ok(Self { alphabet: self.alphabet.clone(), pi })
    }
}
