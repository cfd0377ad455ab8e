use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::Open01;

use crate::rng;
use crate::{Error, Result};

/// Row-stochastic `n × K` matrix of variational membership probabilities `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl Membership {
    /// Wraps a row-major matrix. Rows must be nonnegative and sum to one within `1e-9`.
    pub fn new(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if k == 0 || data.len() != n * k {
            return Err(Error::DimensionMismatch(alloc::format!(
                "membership data of length {} for n={n}, K={k}",
                data.len()
            )));
        }
        for (i, row) in data.chunks_exact(k).enumerate() {
            let s: f64 = row.iter().sum();
            if row.iter().any(|x| !(*x >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "row {i} of the membership matrix is not on the simplex"
                )));
            }
        }
        Ok(Self { n, k, data })
    }

    pub(crate) fn from_raw(n: usize, k: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * k);
        Self { n, k, data }
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        Self { n, k, data: vec![1.0 / k as f64; n * k] }
    }

    /// Independent `Uniform(0, 1)` entries, each row rescaled to sum to one.
    pub fn random(n: usize, k: usize, seed: u64) -> Self {
        let mut rng = rng::derive(seed, rng::INIT_BASE);
        let mut data = Vec::with_capacity(n * k);
        for _ in 0..n {
            let start = data.len();
            for _ in 0..k {
                data.push(rng.sample::<f64, _>(Open01));
            }
            let s: f64 = data[start..].iter().sum();
            for x in &mut data[start..] {
                *x /= s;
            }
        }
        Self { n, k, data }
    }

    /// One-hot rows; each row puts `1 − (K−1)ε` on its assigned component and `ε` elsewhere.
    pub fn anchored(assignment: &[usize], k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if !(epsilon >= 0.0) || epsilon * (k as f64 - 1.0) >= 1.0 {
            return Err(Error::InvalidConfig(alloc::format!("anchor epsilon {epsilon} is too large")));
        }
        let mut data = vec![epsilon; assignment.len() * k];
        let top = 1.0 - (k - 1) as f64 * epsilon;
        for (i, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "node {i} assigned to component {c} of {k}"
                )));
            }
            data[i * k + c] = top;
        }
        Ok(Self { n: assignment.len(), k, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.k + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `s_k = Σ_i α_ik`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.k];
        for row in self.data.chunks_exact(self.k) {
            for (a, b) in s.iter_mut().zip(row) {
                *a += b;
            }
        }
        s
    }

    /// `argmax_k α_ik`, lowest index on exact ties.
    pub fn hard_assignment(&self) -> Vec<usize> {
        self.data
            .chunks_exact(self.k)
            .map(|row| {
                let mut best = 0;
                for (c, &x) in row.iter().enumerate() {
                    if x > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Raises entries below `floor` to `floor` and renormalizes every row.
    pub fn apply_floor(&mut self, floor: f64) {
        for row in self.data.chunks_exact_mut(self.k) {
            floor_row(row, floor);
        }
    }

    /// New column `c` is old column `order[c]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        crate::model::check_permutation(order, self.k)?;
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.n {
            for c in 0..self.k {
                data[i * self.k + c] = self.data[i * self.k + order[c]];
            }
        }
        Ok(Self { n: self.n, k: self.k, data })
    }
}

pub(crate) fn floor_row(row: &mut [f64], floor: f64) {
    let mut changed = false;
    for x in row.iter_mut() {
        if *x < floor {
            *x = floor;
            changed = true;
        }
    }
    let s: f64 = row.iter().sum();
    if changed || s != 1.0 {
        for x in row.iter_mut() {
            *x /= s;
        }
    }
}
