//! Independent brute-force oracles and random instance generators.
//!
//! Everything here works on dense representations and direct double loops so
//! that it shares no code paths with the sparse implementations under test.
#![allow(dead_code)]

use blockmix_core::engine::{Membership, VariationalState};
use blockmix_core::model::{DyadModel, ExpFamBlockModel, FamilyKind, TabularBlockModel};
use blockmix_core::{Dyad, DyadAlphabet, EdgeAlphabet, SparseNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alphabets() -> Vec<DyadAlphabet> {
    vec![
        DyadAlphabet::undirected(EdgeAlphabet::binary()),
        DyadAlphabet::directed(EdgeAlphabet::binary()),
        DyadAlphabet::directed(EdgeAlphabet::signed()),
        DyadAlphabet::undirected(EdgeAlphabet::signed()),
    ]
}

pub fn random_alphabet(r: &mut TestRng) -> DyadAlphabet {
    let all = alphabets();
    all[r.random_range(0..all.len())].clone()
}

/// Each pair independently nonbaseline with probability `density`, value uniform over the rest.
pub fn random_network(n: usize, alphabet: &DyadAlphabet, density: f64, r: &mut TestRng) -> SparseNetwork {
    let base = alphabet.baseline();
    let others: Vec<Dyad> = alphabet.iter().filter(|d| *d != base).collect();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < density {
                triples.push((i, j, others[r.random_range(0..others.len())]));
            }
        }
    }
    SparseNetwork::from_dyads(n, alphabet.clone(), triples).unwrap()
}

/// Dense `n × n` matrix of dyads oriented from the row node.
pub fn dense_dyads(net: &SparseNetwork) -> Vec<Vec<Dyad>> {
    let n = net.n();
    let a = net.alphabet();
    let mut m = vec![vec![a.baseline(); n]; n];
    for e in net.pairs() {
        let (i, j) = (e.i as usize, e.j as usize);
        m[i][j] = e.dyad;
        m[j][i] = a.transpose(e.dyad);
    }
    m
}

pub fn random_simplex(k: usize, r: &mut TestRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(r.random::<f64>().max(1e-300)).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_alpha(n: usize, k: usize, r: &mut TestRng) -> Membership {
    let data: Vec<f64> = (0..n).flat_map(|_| random_simplex(k, r)).collect();
    Membership::new(n, k, data).unwrap()
}

/// Strictly positive transpose-symmetric table.
pub fn random_tabular(k: usize, alphabet: &DyadAlphabet, r: &mut TestRng) -> TabularBlockModel {
    let size = alphabet.size();
    TabularBlockModel::from_upper(k, alphabet.clone(), |a, b| {
        let mut w: Vec<f64> = (0..size).map(|_| 0.05 + r.random::<f64>()).collect();
        if a == b {
            for d in alphabet.iter() {
                let t = alphabet.transpose(d);
                if t.index() > d.index() {
                    w[t.index()] = w[d.index()];
                }
            }
        }
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
    .unwrap()
}

/// Custom family with random statistics satisfying `t_kl(d) = t_lk(dᵀ)`.
pub fn random_family(k: usize, alphabet: &DyadAlphabet, p: usize, r: &mut TestRng) -> ExpFamBlockModel {
    let size = alphabet.size();
    let mut stats = vec![f64::NAN; k * k * size * p];
    for a in 0..k {
        for b in 0..k {
            for d in alphabet.iter() {
                let at = ((a * k + b) * size + d.index()) * p;
                if !stats[at].is_nan() {
                    continue;
                }
                let t: Vec<f64> = (0..p).map(|_| r.random_range(-1.5..1.5)).collect();
                let mirror = ((b * k + a) * size + alphabet.transpose(d).index()) * p;
                stats[at..at + p].copy_from_slice(&t);
                stats[mirror..mirror + p].copy_from_slice(&t);
            }
        }
    }
    let names = (0..p).map(|c| format!("t{c}")).collect();
    let mut m = ExpFamBlockModel::new(FamilyKind::Custom, k, alphabet.clone(), stats, names, vec![false; p]).unwrap();
    let theta: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
    m.set_theta(&theta).unwrap();
    m
}

pub fn random_state(n: usize, k: usize, alphabet: &DyadAlphabet, r: &mut TestRng) -> VariationalState {
    let alpha = random_alpha(n, k, r);
    let gamma = random_simplex(k, r);
    let model = DyadModel::Tabular(random_tabular(k, alphabet, r));
    VariationalState::new(alpha, gamma, model).unwrap()
}

/// `ln π_{d;kl}(θ)` by explicit softmax over the statistic table.
pub fn softmax_log_prob(m: &ExpFamBlockModel, theta: &[f64], k: usize, l: usize, d: Dyad) -> f64 {
    let score = |e: Dyad| m.stat(k, l, e).iter().zip(theta).map(|(t, th)| t * th).sum::<f64>();
    let z: f64 = m.alphabet().iter().map(|e| score(e).exp()).sum();
    score(d) - z.ln()
}

/// Probability of dyad `d` on block `(k, l)` straight from a model.
pub fn prob(model: &DyadModel, k: usize, l: usize, d: Dyad) -> f64 {
    model.dyad_log_prob(k, l, d).unwrap().exp()
}

/// Direct double-loop lower bound over all ordered block pairs and node pairs `i < j`.
pub fn direct_lower_bound(net: &SparseNetwork, state: &VariationalState) -> f64 {
    let dense = dense_dyads(net);
    let (n, k) = (state.alpha.n(), state.alpha.k());
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..k {
                for b in 0..k {
                    let w = state.alpha.get(i, a) * state.alpha.get(j, b);
                    if w > 0.0 {
                        total += w * state.model.dyad_log_prob(a, b, dense[i][j]).unwrap();
                    }
                }
            }
        }
    }
    for i in 0..n {
        for a in 0..k {
            let x = state.alpha.get(i, a);
            if x > 0.0 {
                total += x * (state.gamma[a].ln() - x.ln());
            }
        }
    }
    total
}

/// `ln P(Y = y)` summing over all `K^n` assignments.
pub fn exact_log_likelihood(net: &SparseNetwork, gamma: &[f64], model: &DyadModel) -> f64 {
    let dense = dense_dyads(net);
    let n = net.n();
    let k = gamma.len();
    let mut z = vec![0usize; n];
    let mut terms = Vec::new();
    loop {
        let mut lp: f64 = z.iter().map(|&c| gamma[c].ln()).sum();
        for i in 0..n {
            for j in i + 1..n {
                lp += model.dyad_log_prob(z[i], z[j], dense[i][j]).unwrap();
            }
        }
        terms.push(lp);
        let mut pos = 0;
        loop {
            if pos == n {
                let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                return max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
            }
            z[pos] += 1;
            if z[pos] < k {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
    }
}

/// Brute-force soft counts `(W[k,l], C[d,k,l])` over ordered node pairs `i ≠ j`, halved.
///
/// Summing `α_ik α_jl 1(D_ij = d)` over both orders of each unordered pair and
/// halving is the symmetrized count the engine uses.
pub fn brute_force_counts(net: &SparseNetwork, alpha: &Membership) -> (Vec<f64>, Vec<f64>) {
    let dense = dense_dyads(net);
    let (n, k) = (alpha.n(), alpha.k());
    let size = net.alphabet().size();
    let mut w = vec![0.0; k * k];
    let mut c = vec![0.0; k * k * size];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for a in 0..k {
                for b in 0..k {
                    let x = 0.5 * alpha.get(i, a) * alpha.get(j, b);
                    w[a * k + b] += x;
                    c[(a * k + b) * size + dense[i][j].index()] += x;
                }
            }
        }
    }
    (w, c)
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || a == b
}
