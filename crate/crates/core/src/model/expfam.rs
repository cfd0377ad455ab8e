use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_indices, check_permutation, BlockTable};
use crate::alphabet::{Dyad, DyadAlphabet};
use crate::math::{exp, log_sum_exp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Mixture version of the p1 model: reciprocity plus per-component send/receive.
    P1,
    /// Signed-network model with per-component trust parameters.
    ExcessTrust,
    /// One indicator per transpose orbit of `(k, l, d)`, baseline as reference.
    Saturated,
    /// Statistic tables supplied by the caller.
    Custom,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::P1 => "p1",
            FamilyKind::ExcessTrust => "excess-trust",
            FamilyKind::Saturated => "saturated",
            FamilyKind::Custom => "custom",
        }
    }
}

/// Log-linear block model `π_{d;kl}(θ) = exp(θᵀ t_kl(d) − ψ_kl(θ))`.
///
/// Statistic vectors are materialized for every `(k, l, d)`. Coordinates in
/// the fixed mask are held at their current value by every optimizer; the
/// builders initialize all coordinates, fixed or not, to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamBlockModel {
    kind: FamilyKind,
    alphabet: DyadAlphabet,
    k: usize,
    theta: Vec<f64>,
    stats: Vec<f64>,
    fixed: Vec<bool>,
    names: Vec<String>,
}

/// `ψ_kl`, `E_θ[t_kl(D)]` and `Cov_θ[t_kl(D)]` for every block pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMoments {
    k: usize,
    p: usize,
    log_norm: Vec<f64>,
    mean: Vec<f64>,
    cov: Vec<f64>,
}

impl BlockMoments {
    pub fn log_norm(&self, k: usize, l: usize) -> f64 {
        self.log_norm[k * self.k + l]
    }

    pub fn mean(&self, k: usize, l: usize) -> &[f64] {
        let start = (k * self.k + l) * self.p;
        &self.mean[start..start + self.p]
    }

    /// Row-major `p × p` covariance.
    pub fn cov(&self, k: usize, l: usize) -> &[f64] {
        let pp = self.p * self.p;
        let start = (k * self.k + l) * pp;
        &self.cov[start..start + pp]
    }

    pub fn dim(&self) -> usize {
        self.p
    }
}

impl ExpFamBlockModel {
    /// `stats` is laid out as `[(k * K + l) * |𝒟| + d] * p + coordinate`.
    pub fn new(
        kind: FamilyKind,
        k: usize,
        alphabet: DyadAlphabet,
        stats: Vec<f64>,
        names: Vec<String>,
        fixed: Vec<bool>,
    ) -> Result<Self> {
        let p = names.len();
        let size = alphabet.size();
        if k == 0 {
            return Err(Error::InvalidStatistics("K must be at least 1".into()));
        }
        if p == 0 {
            return Err(Error::InvalidStatistics("family has no parameters".into()));
        }
        if stats.len() != k * k * size * p {
            return Err(Error::DimensionMismatch(format!(
                "statistic table of length {} for K={k}, |D|={size}, p={p}",
                stats.len()
            )));
        }
        if fixed.len() != p {
            return Err(Error::DimensionMismatch(format!("mask of length {} for p={p}", fixed.len())));
        }
        if stats.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidStatistics("non-finite statistic".into()));
        }
        let model = Self { kind, alphabet, k, theta: vec![0.0; p], stats, fixed, names };
        for a in 0..k {
            for b in 0..k {
                for d in model.alphabet.iter() {
                    if model.stat(a, b, d) != model.stat(b, a, model.alphabet.transpose(d)) {
                        return Err(Error::InvalidStatistics(format!(
                            "t_({a},{b})(d={}) differs from t_({b},{a}) of the transposed dyad",
                            d.index()
                        )));
                    }
                }
            }
        }
        Ok(model)
    }

    /// Mixture p1 model on a directed binary or signed alphabet.
    ///
    /// Parameters are `(ρ, send_1, receive_1, …, send_K, receive_K)`. Block
    /// `(k, l)` of dyad `(y_ij, y_ji)` contributes `ρ y_ij y_ji`,
    /// `send_k y_ij + receive_k y_ji` and `send_l y_ji + receive_l y_ij`.
    /// Shifting every send up and every receive down by the same amount leaves
    /// the model unchanged, so `receive_1` is fixed.
    pub fn p1_mixture(k: usize, alphabet: DyadAlphabet) -> Result<Self> {
        let edge = alphabet.edge_alphabet();
        if !alphabet.is_directed() || !(edge.is_binary() || edge.is_signed()) {
            return Err(Error::UnsupportedAlphabet {
                model: "the p1 mixture",
                requirement: "directed binary or signed",
            });
        }
        let p = 1 + 2 * k;
        let size = alphabet.size();
        let mut stats = vec![0.0; k * k * size * p];
        for a in 0..k {
            for b in 0..k {
                for d in alphabet.iter() {
                    let (x, y) = alphabet.labels(d);
                    let (x, y) = (x as f64, y as f64);
                    let t = &mut stats[((a * k + b) * size + d.index()) * p..][..p];
                    t[0] = x * y;
                    t[1 + 2 * a] += x;
                    t[2 + 2 * a] += y;
                    t[1 + 2 * b] += y;
                    t[2 + 2 * b] += x;
                }
            }
        }
        let mut names = vec![String::from("reciprocity")];
        for c in 1..=k {
            names.push(format!("send_{c}"));
            names.push(format!("receive_{c}"));
        }
        let mut fixed = vec![false; p];
        fixed[2] = true;
        Self::new(FamilyKind::P1, k, alphabet, stats, names, fixed)
    }

    /// Excess-trust model on the signed directed alphabet.
    ///
    /// Parameters are `(θ⁻, θ⁻⁻, θ⁺⁺, trust_1, …, trust_K, θ⁺)` with `θ⁺`
    /// fixed at zero. Block `(k, l)` of dyad `(y_ij, y_ji)` has statistics
    /// `y⁻_ij + y⁻_ji`, `y⁻_ij y⁻_ji`, `y⁺_ij y⁺_ji`, `y_ji` in the trust slot
    /// of `k`, `y_ij` in the trust slot of `l`, and `y⁺_ij + y⁺_ji`.
    pub fn excess_trust(k: usize) -> Result<Self> {
        let alphabet = DyadAlphabet::directed(crate::EdgeAlphabet::signed());
        let p = 4 + k;
        let size = alphabet.size();
        let mut stats = vec![0.0; k * k * size * p];
        let neg = |v: i32| (v == -1) as i32 as f64;
        let pos = |v: i32| (v == 1) as i32 as f64;
        for a in 0..k {
            for b in 0..k {
                for d in alphabet.iter() {
                    let (x, y) = alphabet.labels(d);
                    let t = &mut stats[((a * k + b) * size + d.index()) * p..][..p];
                    t[0] = neg(x) + neg(y);
                    t[1] = neg(x) * neg(y);
                    t[2] = pos(x) * pos(y);
                    t[3 + a] += y as f64;
                    t[3 + b] += x as f64;
                    t[3 + k] = pos(x) + pos(y);
                }
            }
        }
        let mut names = vec![String::from("negative"), "negative_reciprocity".into(), "positive_reciprocity".into()];
        for c in 1..=k {
            names.push(format!("trust_{c}"));
        }
        names.push("positive".into());
        let mut fixed = vec![false; p];
        fixed[3 + k] = true;
        Self::new(FamilyKind::ExcessTrust, k, alphabet, stats, names, fixed)
    }

    /// One indicator per transpose orbit `{(k,l,d), (l,k,dᵀ)}` with `d` not the baseline.
    ///
    /// Every strictly positive symmetric table is `π(θ)` for exactly one `θ`.
    pub fn saturated(k: usize, alphabet: DyadAlphabet) -> Result<Self> {
        let size = alphabet.size();
        let baseline = alphabet.baseline();
        let mut orbit = vec![usize::MAX; k * k * size];
        let mut names = Vec::new();
        for a in 0..k {
            for b in a..k {
                for d in alphabet.iter() {
                    let at = (a * k + b) * size + d.index();
                    if d == baseline || orbit[at] != usize::MAX {
                        continue;
                    }
                    let id = names.len();
                    let (x, y) = alphabet.labels(d);
                    names.push(format!("block_{}_{}[{x},{y}]", a + 1, b + 1));
                    orbit[at] = id;
                    let dt = alphabet.transpose(d);
                    orbit[(b * k + a) * size + dt.index()] = id;
                }
            }
        }
        let p = names.len();
        let mut stats = vec![0.0; k * k * size * p];
        for (cell, &id) in orbit.iter().enumerate() {
            if id != usize::MAX {
                stats[cell * p + id] = 1.0;
            }
        }
        let fixed = vec![false; p];
        Self::new(FamilyKind::Saturated, k, alphabet, stats, names, fixed)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &DyadAlphabet {
        &self.alphabet
    }

    /// Length of `θ`, fixed coordinates included.
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn free_dim(&self) -> usize {
        self.fixed.iter().filter(|f| !**f).count()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.fixed[i]).collect()
    }

    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn stats_table(&self) -> &[f64] {
        &self.stats
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "θ of length {} for p={}",
                theta.len(),
                self.dim()
            )));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("θ must be finite".into()));
        }
        self.theta.copy_from_slice(theta);
        Ok(())
    }

    pub fn with_theta(mut self, theta: &[f64]) -> Result<Self> {
        self.set_theta(theta)?;
        Ok(self)
    }

    pub fn set_fixed_mask(&mut self, fixed: Vec<bool>) -> Result<()> {
        if fixed.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("mask of length {}", fixed.len())));
        }
        self.fixed = fixed;
        Ok(())
    }

    pub(crate) fn free_theta(&self) -> Vec<f64> {
        self.free_indices().into_iter().map(|i| self.theta[i]).collect()
    }

    pub(crate) fn free_names(&self) -> Vec<String> {
        self.free_indices().into_iter().map(|i| self.names[i].clone()).collect()
    }

    #[inline]
    pub fn stat(&self, k: usize, l: usize, d: Dyad) -> &[f64] {
        let p = self.dim();
        let start = ((k * self.k + l) * self.alphabet.size() + d.index()) * p;
        &self.stats[start..start + p]
    }

    fn block_natural(&self, theta: &[f64], k: usize, l: usize, out: &mut [f64]) {
        for d in self.alphabet.iter() {
            out[d.index()] = self.stat(k, l, d).iter().zip(theta).map(|(t, th)| t * th).sum();
        }
    }

    /// `ψ_kl(θ)` at an arbitrary `θ`.
    pub fn log_norm_at(&self, theta: &[f64], k: usize, l: usize) -> f64 {
        let mut eta = vec![0.0; self.alphabet.size()];
        self.block_natural(theta, k, l, &mut eta);
        log_sum_exp(&eta)
    }

    pub fn dyad_log_prob(&self, k: usize, l: usize, d: Dyad) -> Result<f64> {
        check_indices(self.k, self.alphabet.size(), k, l, d)?;
        let eta: f64 = self.stat(k, l, d).iter().zip(&self.theta).map(|(t, th)| t * th).sum();
        Ok(eta - self.log_norm_at(&self.theta, k, l))
    }

    pub fn log_prob_table_at(&self, theta: &[f64]) -> BlockTable {
        let size = self.alphabet.size();
        let mut table = BlockTable::filled(self.k, size, 0.0);
        let mut eta = vec![0.0; size];
        for a in 0..self.k {
            for b in 0..self.k {
                self.block_natural(theta, a, b, &mut eta);
                let psi = log_sum_exp(&eta);
                for (slot, e) in table.block_mut(a, b).iter_mut().zip(&eta) {
                    *slot = e - psi;
                }
            }
        }
        table
    }

    pub fn log_prob_table(&self) -> BlockTable {
        self.log_prob_table_at(&self.theta)
    }

    pub fn prob_table(&self) -> BlockTable {
        let mut table = self.log_prob_table();
        for x in table.data.iter_mut() {
            *x = exp(*x);
        }
        table
    }

    /// Exact moments at `theta` by enumeration of `𝒟`.
    pub fn moments_at(&self, theta: &[f64]) -> BlockMoments {
        let (k, p, size) = (self.k, self.dim(), self.alphabet.size());
        let mut log_norm = vec![0.0; k * k];
        let mut mean = vec![0.0; k * k * p];
        let mut cov = vec![0.0; k * k * p * p];
        let mut eta = vec![0.0; size];
        let mut centered = vec![0.0; p];
        for a in 0..k {
            for b in 0..k {
                let cell = a * k + b;
                self.block_natural(theta, a, b, &mut eta);
                let psi = log_sum_exp(&eta);
                log_norm[cell] = psi;
                let m = &mut mean[cell * p..(cell + 1) * p];
                for d in self.alphabet.iter() {
                    let w = exp(eta[d.index()] - psi);
                    for (mi, ti) in m.iter_mut().zip(self.stat(a, b, d)) {
                        *mi += w * ti;
                    }
                }
                let c = &mut cov[cell * p * p..(cell + 1) * p * p];
                for d in self.alphabet.iter() {
                    let w = exp(eta[d.index()] - psi);
                    for (ci, (ti, mi)) in centered.iter_mut().zip(self.stat(a, b, d).iter().zip(m.iter())) {
                        *ci = ti - mi;
                    }
                    for r in 0..p {
                        if centered[r] == 0.0 {
                            continue;
                        }
                        let wr = w * centered[r];
                        for s in 0..=r {
                            c[r * p + s] += wr * centered[s];
                        }
                    }
                }
                for r in 0..p {
                    for s in 0..r {
                        c[s * p + r] = c[r * p + s];
                    }
                }
            }
        }
        BlockMoments { k, p, log_norm, mean, cov }
    }

    pub fn block_moments(&self) -> BlockMoments {
        self.moments_at(&self.theta)
    }

    /// Relabels components so that new component `c` is old component `order[c]`.
    pub fn permute_components(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.k)?;
        let (p, size) = (self.dim(), self.alphabet.size());
        let mut stats = vec![0.0; self.stats.len()];
        for a in 0..self.k {
            for b in 0..self.k {
                let src = (order[a] * self.k + order[b]) * size * p;
                let dst = (a * self.k + b) * size * p;
                stats[dst..dst + size * p].copy_from_slice(&self.stats[src..src + size * p]);
            }
        }
        Ok(Self { stats, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::EdgeAlphabet;

    fn directed_binary() -> DyadAlphabet {
        DyadAlphabet::directed(EdgeAlphabet::binary())
    }

    #[test]
    fn p1_structure_counts() {
        let m = ExpFamBlockModel::p1_mixture(1, directed_binary()).unwrap();
        assert_eq!(m.dim(), 3);
        let m = ExpFamBlockModel::p1_mixture(3, directed_binary()).unwrap();
        assert_eq!(m.dim(), 7);
        assert_eq!(m.free_dim(), 6);
        assert!(ExpFamBlockModel::p1_mixture(2, DyadAlphabet::undirected(EdgeAlphabet::binary())).is_err());
    }

    #[test]
    fn zero_theta_is_uniform() {
        let m = ExpFamBlockModel::excess_trust(3).unwrap();
        for d in m.alphabet().iter() {
            let lp = m.dyad_log_prob(1, 2, d).unwrap();
            assert!((lp - libm::log(1.0 / 9.0)).abs() < 1e-14);
        }
        let mom = m.block_moments();
        assert!((mom.log_norm(0, 1) - libm::log(9.0)).abs() < 1e-14);
    }

    #[test]
    fn excess_trust_counts_and_statistics() {
        let m = ExpFamBlockModel::excess_trust(5).unwrap();
        assert_eq!(m.free_dim(), 8);
        assert_eq!(m.free_dim() + 4, 12);
        let a = m.alphabet().clone();
        assert!(m.stat(2, 4, a.baseline()).iter().all(|&x| x == 0.0));
        let d = a.from_labels(1, -1).unwrap();
        let t = m.stat(1, 3, d);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[1], 0.0);
        assert_eq!(t[2], 0.0);
        assert_eq!(t[3 + 1], -1.0);
        assert_eq!(t[3 + 3], 1.0);
        assert_eq!(t[3 + 5], 1.0);
        assert!(m.fixed_mask()[3 + 5]);
    }

    #[test]
    fn bernoulli_half_moments() {
        let alphabet = DyadAlphabet::undirected(EdgeAlphabet::binary());
        let m = ExpFamBlockModel::new(
            FamilyKind::Custom,
            1,
            alphabet,
            vec![0.0, 1.0],
            vec!["edges".into()],
            vec![false],
        )
        .unwrap();
        let mom = m.block_moments();
        assert!((mom.mean(0, 0)[0] - 0.5).abs() < 1e-15);
        assert!((mom.cov(0, 0)[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_statistics_rejected() {
        let alphabet = directed_binary();
        // t_00 must satisfy t(d) = t(dᵀ); an indicator of (1,0) alone breaks that.
        let mut stats = vec![0.0; 4];
        stats[alphabet.from_labels(1, 0).unwrap().index()] = 1.0;
        let err = ExpFamBlockModel::new(FamilyKind::Custom, 1, alphabet, stats, vec!["x".into()], vec![false]);
        assert!(matches!(err, Err(Error::InvalidStatistics(_))));
    }

    #[test]
    fn saturated_orbit_count() {
        // K=2 directed binary: blocks (1,1),(2,2) have orbits {01,10},{11}; the cross block has 3.
        let m = ExpFamBlockModel::saturated(2, directed_binary()).unwrap();
        assert_eq!(m.dim(), 7);
    }
}
