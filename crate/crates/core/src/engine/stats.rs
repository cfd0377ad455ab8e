//! Soft block counts and the variational lower bound.
//!
//! Counts are symmetrized over the two orientations of each pair:
//!
//! ```text
//! W[k,l]   = ½ Σ_{i<j} (α_ik α_jl + α_il α_jk)                 = (s_k s_l − q_kl) / 2
//! C[d,k,l] = ½ Σ_{i<j} (α_ik α_jl 1(D_ij = d) + α_il α_jk 1(D_ij = dᵀ))
//! ```
//!
//! so `C[d,k,l] = C[dᵀ,l,k]`, `Σ_d C[d,k,l] = W[k,l]` and, for any symmetric
//! model, `Σ_{i<j} Σ_{k,l} α_ik α_jl ln π_{D_ij;kl} = Σ_{k,l,d} C[d,k,l] ln π_{d;kl}`.
//! Only nonbaseline pairs are visited; baseline counts come from subtraction.

use alloc::vec;
use alloc::vec::Vec;

use super::Membership;
use crate::alphabet::Dyad;
use crate::math::{ln, xlogx};
use crate::model::BlockTable;
use crate::network::SparseNetwork;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDyadStats {
    k: usize,
    pair_weight: Vec<f64>,
    dyad_weight: BlockTable,
    col_sum: Vec<f64>,
    self_prod: Vec<f64>,
}

impl BlockDyadStats {
    pub fn components(&self) -> usize {
        self.k
    }

    /// `W[k,l]`.
    pub fn pair_weight(&self, k: usize, l: usize) -> f64 {
        self.pair_weight[k * self.k + l]
    }

    pub fn pair_weights(&self) -> &[f64] {
        &self.pair_weight
    }

    /// `C[d,k,l]`, baseline included.
    pub fn dyad_weight(&self, k: usize, l: usize, d: Dyad) -> f64 {
        self.dyad_weight.get(k, l, d)
    }

    pub fn dyad_weights(&self) -> &BlockTable {
        &self.dyad_weight
    }

    /// `s_k = Σ_i α_ik`.
    pub fn col_sum(&self) -> &[f64] {
        &self.col_sum
    }

    /// `q_kl = Σ_i α_ik α_il`.
    pub fn self_prod(&self, k: usize, l: usize) -> f64 {
        self.self_prod[k * self.k + l]
    }
}

/// Accumulates [`BlockDyadStats`] in `O(nK² + f(n)K²)` time.
pub fn accumulate_block_stats(network: &SparseNetwork, alpha: &Membership) -> Result<BlockDyadStats> {
    if alpha.n() != network.n() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "membership has {} rows for {} nodes",
            alpha.n(),
            network.n()
        )));
    }
    let k = alpha.k();
    let alphabet = network.alphabet();
    let size = alphabet.size();
    let baseline = alphabet.baseline();

    let col_sum = alpha.column_sums();
    let mut self_prod = vec![0.0; k * k];
    for i in 0..alpha.n() {
        let row = alpha.row(i);
        for a in 0..k {
            for b in 0..k {
                self_prod[a * k + b] += row[a] * row[b];
            }
        }
    }
    let mut pair_weight = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            pair_weight[a * k + b] = 0.5 * (col_sum[a] * col_sum[b] - self_prod[a * k + b]);
        }
    }

    let mut dyad_weight = BlockTable::filled(k, size, 0.0);
    for e in network.pairs() {
        let ri = alpha.row(e.i as usize);
        let rj = alpha.row(e.j as usize);
        let dt = alphabet.transpose(e.dyad);
        for a in 0..k {
            let half = 0.5 * ri[a];
            for b in 0..k {
                let w = half * rj[b];
                let cell = &mut dyad_weight;
                let v = cell.get(a, b, e.dyad);
                cell.set(a, b, e.dyad, v + w);
                let v = cell.get(b, a, dt);
                cell.set(b, a, dt, v + w);
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            let block = dyad_weight.block_mut(a, b);
            let other: f64 = block
                .iter()
                .enumerate()
                .filter(|(d, _)| *d != baseline.index())
                .map(|(_, w)| *w)
                .sum();
            block[baseline.index()] = (pair_weight[a * k + b] - other).max(0.0);
        }
    }

    Ok(BlockDyadStats { k, pair_weight, dyad_weight, col_sum, self_prod })
}

/// Weights at or below this count as zero when multiplied by `ln 0`.
fn negligible(weight: f64, scale: f64) -> bool {
    weight <= 1e-12 * scale.max(1.0)
}

/// `Σ_{k,l,d} C[d,k,l] ln π_{d;kl}`; `-inf` if a zero-probability dyad carries weight.
pub(crate) fn expected_log_likelihood(stats: &BlockDyadStats, log_pi: &BlockTable) -> f64 {
    let k = stats.k;
    let mut total = 0.0;
    for a in 0..k {
        for b in 0..k {
            let scale = stats.pair_weight(a, b);
            for (w, lp) in stats.dyad_weight.block(a, b).iter().zip(log_pi.block(a, b)) {
                if *lp == f64::NEG_INFINITY {
                    if !negligible(*w, scale) {
                        return f64::NEG_INFINITY;
                    }
                } else {
                    total += w * lp;
                }
            }
        }
    }
    total
}

/// `Σ_i Σ_k α_ik (ln γ_k − ln α_ik)` with `0 ln 0 = 0`.
pub(crate) fn membership_term(alpha: &Membership, gamma: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..alpha.n() {
        for (x, g) in alpha.row(i).iter().zip(gamma) {
            if *x > 0.0 {
                if *g <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += x * ln(*g) - xlogx(*x);
            }
        }
    }
    total
}

pub(crate) fn lower_bound_parts(
    stats: &BlockDyadStats,
    log_pi: &BlockTable,
    alpha: &Membership,
    gamma: &[f64],
) -> f64 {
    expected_log_likelihood(stats, log_pi) + membership_term(alpha, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{DyadAlphabet, EdgeAlphabet};

    #[test]
    fn hard_alpha_on_empty_network_counts_pairs() {
        let alphabet = DyadAlphabet::undirected(EdgeAlphabet::binary());
        let net = SparseNetwork::empty(5, alphabet);
        let alpha = Membership::anchored(&[0, 0, 0, 1, 1], 2, 0.0).unwrap();
        let stats = accumulate_block_stats(&net, &alpha).unwrap();
        // m = (3, 2); within-block pairs m(m-1)/2, cross pairs split over both orders.
        assert_eq!(stats.pair_weight(0, 0), 3.0);
        assert_eq!(stats.pair_weight(1, 1), 1.0);
        assert_eq!(stats.pair_weight(0, 1) + stats.pair_weight(1, 0), 6.0);
        assert_eq!(stats.dyad_weight(0, 1, Dyad::new(1)), 0.0);
        assert_eq!(stats.dyad_weight(0, 0, Dyad::new(0)), 3.0);
    }

    #[test]
    fn two_nodes_one_dyad() {
        let alphabet = DyadAlphabet::directed(EdgeAlphabet::binary());
        let d0 = alphabet.from_labels(1, 0).unwrap();
        let net = SparseNetwork::from_dyads(2, alphabet.clone(), [(0, 1, d0)]).unwrap();
        let alpha = Membership::uniform(2, 1);
        let stats = accumulate_block_stats(&net, &alpha).unwrap();
        assert_eq!(stats.pair_weight(0, 0), 1.0);
        // Within one block the dyad and its transpose share the unit weight.
        assert_eq!(stats.dyad_weight(0, 0, d0) + stats.dyad_weight(0, 0, alphabet.transpose(d0)), 1.0);
        assert_eq!(stats.dyad_weight(0, 0, alphabet.baseline()), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let net = SparseNetwork::empty(3, DyadAlphabet::undirected(EdgeAlphabet::binary()));
        assert!(accumulate_block_stats(&net, &Membership::uniform(4, 2)).is_err());
    }
}
