//! Dyad probability models `π_{d;kl}`.
//!
//! Two parameterizations are supported: an unconstrained table of
//! probabilities ([`TabularBlockModel`]) and a log-linear family
//! `π_{d;kl}(θ) = exp(θᵀ t_kl(d) − ψ_kl(θ))` with precomputed statistic
//! tables ([`ExpFamBlockModel`]). Both satisfy the transpose symmetry
//! `π_{(a,b);kl} = π_{(b,a);lk}`, which lets the engine orient every dyad from
//! whichever endpoint it is looking at.

mod expfam;
mod loglinear;
mod tabular;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use expfam::{BlockMoments, ExpFamBlockModel, FamilyKind};
pub use loglinear::{
    aggregate_target_stats, invert_mean_parameters, loglinear_gradient, loglinear_hessian,
    loglinear_objective, maximize_loglinear, NewtonOptions, NewtonReport,
};
pub use tabular::TabularBlockModel;

use crate::alphabet::{Dyad, DyadAlphabet};
use crate::{Error, Result};

/// Dense `K × K × |𝒟|` array indexed by `(k, l, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTable {
    k: usize,
    d: usize,
    data: Vec<f64>,
}

impl BlockTable {
    pub fn filled(k: usize, d: usize, value: f64) -> Self {
        Self { k, d, data: vec![value; k * k * d] }
    }

    pub fn from_vec(k: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != k * k * d {
            return Err(Error::DimensionMismatch(alloc::format!(
                "table of length {} for K={k}, |D|={d}",
                data.len()
            )));
        }
        Ok(Self { k, d, data })
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn dyads(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize, d: Dyad) -> f64 {
        self.data[(k * self.k + l) * self.d + d.index()]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, d: Dyad, value: f64) {
        self.data[(k * self.k + l) * self.d + d.index()] = value;
    }

    /// The `|𝒟|` entries of block `(k, l)`.
    #[inline]
    pub fn block(&self, k: usize, l: usize) -> &[f64] {
        let start = (k * self.k + l) * self.d;
        &self.data[start..start + self.d]
    }

    #[inline]
    pub fn block_mut(&mut self, k: usize, l: usize) -> &mut [f64] {
        let start = (k * self.k + l) * self.d;
        &mut self.data[start..start + self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Either parameterization of the block dyad probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum DyadModel {
    Tabular(TabularBlockModel),
    ExpFam(ExpFamBlockModel),
}

impl DyadModel {
    pub fn components(&self) -> usize {
        match self {
            DyadModel::Tabular(m) => m.components(),
            DyadModel::ExpFam(m) => m.components(),
        }
    }

    pub fn alphabet(&self) -> &DyadAlphabet {
        match self {
            DyadModel::Tabular(m) => m.alphabet(),
            DyadModel::ExpFam(m) => m.alphabet(),
        }
    }

    pub fn prob_table(&self) -> BlockTable {
        match self {
            DyadModel::Tabular(m) => m.table().clone(),
            DyadModel::ExpFam(m) => m.prob_table(),
        }
    }

    /// `ln π_{d;kl}` for every `(k, l, d)`; zero tabular entries give `-inf`.
    pub fn log_prob_table(&self) -> BlockTable {
        match self {
            DyadModel::Tabular(m) => m.log_table(),
            DyadModel::ExpFam(m) => m.log_prob_table(),
        }
    }

    pub fn dyad_log_prob(&self, k: usize, l: usize, d: Dyad) -> Result<f64> {
        match self {
            DyadModel::Tabular(m) => m.dyad_log_prob(k, l, d),
            DyadModel::ExpFam(m) => m.dyad_log_prob(k, l, d),
        }
    }

    /// Estimated quantities reported by fits and the bootstrap: free natural
    /// parameters for log-linear models, `π_{d;kl}` for `k ≤ l` for tables.
    pub fn parameter_vector(&self) -> Vec<f64> {
        match self {
            DyadModel::Tabular(m) => m.upper_entries(),
            DyadModel::ExpFam(m) => m.free_theta(),
        }
    }

    pub fn parameter_names(&self) -> Vec<String> {
        match self {
            DyadModel::Tabular(m) => m.upper_entry_names(),
            DyadModel::ExpFam(m) => m.free_names(),
        }
    }

    /// Relabels components so that new component `c` is old component `order[c]`.
    pub fn permute_components(&self, order: &[usize]) -> Result<Self> {
        Ok(match self {
            DyadModel::Tabular(m) => DyadModel::Tabular(m.permute_components(order)?),
            DyadModel::ExpFam(m) => DyadModel::ExpFam(m.permute_components(order)?),
        })
    }
}

pub(crate) fn check_permutation(order: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(Error::DimensionMismatch(alloc::format!(
            "permutation of length {} for K={k}",
            order.len()
        )));
    }
    for &o in order {
        if o >= k || seen[o] {
            return Err(Error::DimensionMismatch(alloc::format!("{order:?} is not a permutation")));
        }
        seen[o] = true;
    }
    Ok(())
}

pub(crate) fn check_indices(k_max: usize, d_max: usize, k: usize, l: usize, d: Dyad) -> Result<()> {
    if k >= k_max || l >= k_max || d.index() >= d_max {
        return Err(Error::DimensionMismatch(alloc::format!(
            "index (k={k}, l={l}, d={}) out of range for K={k_max}, |D|={d_max}",
            d.index()
        )));
    }
    Ok(())
}
