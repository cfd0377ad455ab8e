//! Sparse Monte Carlo sampling of block-model networks.
//!
//! Nodes are assigned to blocks contiguously from a multinomial draw of block
//! sizes. For every block pair `(k, l)`, `k ≤ l`, the number of nonbaseline
//! dyads is drawn as `S_kl ~ Binomial(N_kl, 1 − π_{b;kl})`, `S_kl` distinct
//! pairs are chosen with Floyd's algorithm over pair ranks, and each chosen
//! pair gets a dyad drawn from `π_{d;kl} / (1 − π_{b;kl})`, `d ≠ b`. Work is
//! proportional to `nK²|𝒟|` plus the number of nonbaseline dyads; baseline
//! pairs are never visited.
//!
//! Block pair `(k, l)` draws from its own stream (see [`crate::rng`]), so the
//! output does not depend on the order in which blocks are processed.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use crate::alphabet::Dyad;
use crate::math::sqrt;
use crate::model::DyadModel;
use crate::network::SparseNetwork;
use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    pub gamma: Vec<f64>,
    pub model: DyadModel,
    pub seed: u64,
    /// Apply a uniform random relabeling of nodes after sampling.
    pub relabel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub network: SparseNetwork,
    /// True block of every node (after relabeling, if requested).
    pub assignment: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

/// `M ~ Multinomial(n; γ)` by sequential conditional binomials, then
/// contiguous assignment: the first `M_1` nodes to block 0 and so on.
pub fn sample_memberships(gamma: &[f64], n: usize, rng: &mut Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    check_gamma(gamma)?;
    let k = gamma.len();
    let mut sizes = vec![0usize; k];
    let mut left = n as u64;
    let mut mass = 1.0;
    for c in 0..k {
        if left == 0 {
            break;
        }
        if c + 1 == k {
            sizes[c] = left as usize;
            break;
        }
        let p = if mass > 0.0 { (gamma[c] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let m = binomial(left, p, rng);
        sizes[c] = m as usize;
        left -= m;
        mass -= gamma[c];
    }
    // Any rounding leftover goes to the last block with positive weight.
    if left > 0 && sizes.iter().sum::<usize>() < n {
        let last = (0..k).rev().find(|&c| gamma[c] > 0.0).unwrap_or(k - 1);
        sizes[last] += n - sizes.iter().sum::<usize>();
    }
    let mut assignment = Vec::with_capacity(n);
    for (c, &m) in sizes.iter().enumerate() {
        assignment.extend(core::iter::repeat(c).take(m));
    }
    Ok((sizes, assignment))
}

fn check_gamma(gamma: &[f64]) -> Result<()> {
    let s: f64 = gamma.iter().sum();
    if gamma.is_empty() || gamma.iter().any(|g| !(*g >= 0.0)) || (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSimSpec("γ must be a probability vector".into()));
    }
    Ok(())
}

fn binomial(trials: u64, p: f64, rng: &mut Rng) -> u64 {
    if trials == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        trials
    } else {
        Binomial::new(trials, p).expect("p lies in (0, 1)").sample(rng)
    }
}

/// `count` distinct ranks from `0..total`, uniformly, in increasing order (Floyd's algorithm).
pub fn sample_distinct_ranks(total: u64, count: u64, rng: &mut Rng) -> Result<Vec<u64>> {
    if count > total {
        return Err(Error::SampleTooLarge { requested: count, available: total });
    }
    let mut chosen = BTreeSet::new();
    for j in total - count..total {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Rank `r` of the pair `a < b` in the order `r = b(b−1)/2 + a`.
pub fn unrank_triangular(r: u64) -> (u64, u64) {
    let mut b = ((1.0 + sqrt(1.0 + 8.0 * r as f64)) / 2.0) as u64;
    while b >= 1 && b * (b - 1) / 2 > r {
        b -= 1;
    }
    while (b + 1) * b / 2 <= r {
        b += 1;
    }
    (r - b * (b - 1) / 2, b)
}

/// Rank `r = a·cols + b` of the cell `(a, b)` of a rectangle with `cols` columns.
pub fn unrank_rectangular(r: u64, cols: u64) -> (u64, u64) {
    (r / cols, r % cols)
}

/// Chooses `count` distinct node pairs between blocks occupying the
/// contiguous ranges `first` and `second` (the same range for within-block
/// pairs). Pairs come back as `(i, j)` with `i` in `first` and `j` in `second`.
pub fn sample_distinct_pairs(
    first: core::ops::Range<usize>,
    second: core::ops::Range<usize>,
    count: u64,
    rng: &mut Rng,
) -> Result<Vec<(usize, usize)>> {
    let within = first == second;
    let (mk, ml) = (first.len() as u64, second.len() as u64);
    let total = if within { mk * mk.saturating_sub(1) / 2 } else { mk * ml };
    let ranks = sample_distinct_ranks(total, count, rng)?;
    Ok(ranks
        .into_iter()
        .map(|r| {
            let (a, b) = if within { unrank_triangular(r) } else { unrank_rectangular(r, ml) };
            (first.start + a as usize, second.start + b as usize)
        })
        .collect())
}

/// Draws a network and its true memberships from `spec`.
pub fn sample_network(spec: &SimSpec) -> Result<Simulated> {
    if spec.n == 0 {
        return Err(Error::InvalidSimSpec("n must be positive".into()));
    }
    let k = spec.model.components();
    if spec.gamma.len() != k {
        return Err(Error::InvalidSimSpec(alloc::format!(
            "γ has {} entries for K={k}",
            spec.gamma.len()
        )));
    }
    check_gamma(&spec.gamma)?;
    let alphabet = spec.model.alphabet().clone();
    let baseline = alphabet.baseline();
    let pi = spec.model.prob_table();

    let mut rng_m = rng::derive(spec.seed, rng::MEMBERSHIP);
    let (sizes, mut assignment) = sample_memberships(&spec.gamma, spec.n, &mut rng_m)?;
    let mut starts = vec![0usize; k + 1];
    for c in 0..k {
        starts[c + 1] = starts[c] + sizes[c];
    }

    let nonbaseline: Vec<Dyad> = alphabet.iter().filter(|d| *d != baseline).collect();
    let mut triples = Vec::new();
    for a in 0..k {
        for b in a..k {
            let first = starts[a]..starts[a + 1];
            let second = starts[b]..starts[b + 1];
            let weights: Vec<f64> = nonbaseline.iter().map(|d| pi.get(a, b, *d)).collect();
            let p: f64 = weights.iter().sum();
            let total = if a == b {
                let m = sizes[a] as u64;
                m * m.saturating_sub(1) / 2
            } else {
                sizes[a] as u64 * sizes[b] as u64
            };
            if total == 0 || p <= 0.0 {
                continue;
            }
            let mut rng_b = rng::derive(spec.seed, rng::BLOCK_BASE + (a * k + b) as u64);
            let count = binomial(total, p.min(1.0), &mut rng_b);
            let pairs = sample_distinct_pairs(first, second, count, &mut rng_b)?;
            let pick = WeightedIndex::new(&weights)
                .map_err(|_| Error::InvalidSimSpec(alloc::format!("block ({a}, {b}) has bad weights")))?;
            for (i, j) in pairs {
                triples.push((i, j, nonbaseline[pick.sample(&mut rng_b)]));
            }
        }
    }
    let mut network = SparseNetwork::from_dyads(spec.n, alphabet, triples)?;

    if spec.relabel {
        let mut perm: Vec<usize> = (0..spec.n).collect();
        perm.shuffle(&mut rng::derive(spec.seed, rng::RELABEL));
        network = network.relabel(&perm)?;
        let mut moved = vec![0usize; spec.n];
        for (i, &c) in assignment.iter().enumerate() {
            moved[perm[i]] = c;
        }
        assignment = moved;
    }
    Ok(Simulated { network, assignment, block_sizes: sizes })
}
