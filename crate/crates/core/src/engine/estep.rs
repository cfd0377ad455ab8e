//! E-step strategies.
//!
//! Both strategies need, for every node `i` and component `k`,
//!
//! ```text
//! G[i,k] = Σ_{j≠i} Σ_l α_jl ln π_{d_ij;kl}
//! ```
//!
//! with `d_ij` oriented from `i`. Splitting off the baseline gives
//! `G[i,k] = Σ_l (s_l − α_il) ln π_{b;kl} + Σ_{j ∈ N(i)} Σ_l α_jl (ln π_{d_ij;kl} − ln π_{b;kl})`,
//! which costs `O(K² + deg(i) K²)` per node.
//!
//! The MM strategy maximizes the separable minorizer
//!
//! ```text
//! Q(α) = Σ_i Σ_k [ (G[i,k] / (2 α̂_ik) − 1/α̂_ik) α_ik² + (ln γ_k − ln α̂_ik + 1) α_ik ]
//! ```
//!
//! (with `G` evaluated at the anchor `α̂`) one node at a time on the simplex.
//! The fixed-point strategy sets `α_ik ∝ γ_k exp(G[i,k])` for all nodes at once.

use alloc::vec;
use alloc::vec::Vec;

use super::membership::floor_row;
use super::{Membership, VariationalState};
use crate::math::{ln, softmax_in_place};
use crate::model::BlockTable;
use crate::network::SparseNetwork;
use crate::{Error, Result};

/// Floor applied to `ln π` so zero tabular entries do not poison the baseline split.
const LOG_PROB_FLOOR: f64 = -708.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EStepStrategy {
    /// Generalized E-step maximizing the separable quadratic minorizer.
    Mm,
    /// Synchronous fixed-point update; the lower bound may decrease.
    Fp,
}

fn clamped_log_table(state: &VariationalState) -> BlockTable {
    let mut t = state.model.log_prob_table();
    let k = t.components();
    for a in 0..k {
        for b in 0..k {
            for x in t.block_mut(a, b) {
                if *x < LOG_PROB_FLOOR {
                    *x = LOG_PROB_FLOOR;
                }
            }
        }
    }
    t
}

/// `G[i,·]` for every node, row-major `n × K`.
pub(crate) fn neighborhood_scores(
    network: &SparseNetwork,
    alpha: &Membership,
    log_pi: &BlockTable,
) -> Vec<f64> {
    let (n, k) = (alpha.n(), alpha.k());
    let baseline = network.alphabet().baseline();
    let col_sum = alpha.column_sums();
    let mut log_base = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            log_base[a * k + b] = log_pi.get(a, b, baseline);
        }
    }
    let mut scores = vec![0.0; n * k];
    for i in 0..n {
        let ri = alpha.row(i);
        let out = &mut scores[i * k..(i + 1) * k];
        for a in 0..k {
            let mut acc = 0.0;
            for b in 0..k {
                acc += (col_sum[b] - ri[b]) * log_base[a * k + b];
            }
            out[a] = acc;
        }
        for nb in network.neighbors(i) {
            let rj = alpha.row(nb.node as usize);
            for a in 0..k {
                let mut acc = 0.0;
                for b in 0..k {
                    acc += rj[b] * (log_pi.get(a, b, nb.dyad) - log_base[a * k + b]);
                }
                out[a] += acc;
            }
        }
    }
    scores
}

fn check_dims(network: &SparseNetwork, state: &VariationalState, alpha: &Membership) -> Result<()> {
    if alpha.n() != network.n() || alpha.k() != state.model.components() || state.gamma.len() != alpha.k() {
        return Err(Error::DimensionMismatch("state does not match network or model".into()));
    }
    Ok(())
}

/// Evaluates the minorizer anchored at `anchor` (its `α`, `γ` and model) at `candidate`.
pub fn minorizer_value(
    network: &SparseNetwork,
    anchor: &VariationalState,
    candidate: &Membership,
) -> Result<f64> {
    check_dims(network, anchor, &anchor.alpha)?;
    check_dims(network, anchor, candidate)?;
    for i in 0..anchor.alpha.n() {
        for (c, &x) in anchor.alpha.row(i).iter().enumerate() {
            if !(x > 0.0) {
                return Err(Error::ZeroAnchor { node: i, component: c });
            }
        }
    }
    let log_pi = clamped_log_table(anchor);
    let scores = neighborhood_scores(network, &anchor.alpha, &log_pi);
    let k = candidate.k();
    let mut total = 0.0;
    for i in 0..candidate.n() {
        let hat = anchor.alpha.row(i);
        for (c, &x) in candidate.row(i).iter().enumerate() {
            let g = scores[i * k + c];
            let quad = g / (2.0 * hat[c]) - 1.0 / hat[c];
            let lin = ln(anchor.gamma[c]) - ln(hat[c]) + 1.0;
            total += quad * x * x + lin * x;
        }
    }
    Ok(total)
}

/// Maximizes `Σ_k (a_k x_k² + b_k x_k)` over the probability simplex, `a_k < 0`.
///
/// The KKT conditions give `x_k(λ) = max(0, (λ − b_k) / (2 a_k))`, decreasing
/// in `λ`; `λ` is bracketed and bisected until `|Σ x − 1| ≤ 1e-12`, then
/// recomputed exactly from the resulting active set. Entries below `floor`
/// are raised to it and the row renormalized.
pub fn solve_simplex_qp(quad: &[f64], lin: &[f64], floor: f64) -> Vec<f64> {
    let k = quad.len();
    debug_assert_eq!(k, lin.len());
    if k == 1 {
        return vec![1.0];
    }
    let curvature: Vec<f64> = quad.iter().map(|a| -2.0 * a).collect();
    let eval = |lambda: f64, x: &mut [f64]| -> f64 {
        let mut s = 0.0;
        for c in 0..k {
            x[c] = ((lin[c] - lambda) / curvature[c]).max(0.0);
            s += x[c];
        }
        s
    };
    let mut x = vec![0.0; k];
    let mut hi = lin.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = (0..k).map(|c| lin[c] - curvature[c]).fold(f64::INFINITY, f64::min);
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..200 {
        lambda = 0.5 * (lo + hi);
        let s = eval(lambda, &mut x);
        if (s - 1.0).abs() <= 1e-12 {
            break;
        }
        if s > 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }

    // Exact multiplier for the active set found by bisection.
    let (mut num, mut den) = (0.0, 0.0);
    for c in 0..k {
        if lin[c] > lambda {
            num += lin[c] / curvature[c];
            den += 1.0 / curvature[c];
        }
    }
    if den > 0.0 {
        let exact = (num - 1.0) / den;
        let mut y = vec![0.0; k];
        let s = eval(exact, &mut y);
        let same_support = (0..k).all(|c| (y[c] > 0.0) == (lin[c] > lambda));
        if same_support && (s - 1.0).abs() <= (eval(lambda, &mut x) - 1.0).abs() {
            x = y;
        } else {
            eval(lambda, &mut x);
        }
    }
    floor_row(&mut x, floor);
    x
}

/// Generalized (MM) E-step: one exact minorizer maximization per node against the fixed anchor.
pub fn e_step_mm(network: &SparseNetwork, state: &VariationalState, floor: f64) -> Result<Membership> {
    check_dims(network, state, &state.alpha)?;
    let (n, k) = (state.alpha.n(), state.alpha.k());
    if k == 1 {
        return Ok(Membership::from_raw(n, 1, vec![1.0; n]));
    }
    let log_pi = clamped_log_table(state);
    let scores = neighborhood_scores(network, &state.alpha, &log_pi);
    let log_gamma: Vec<f64> = state.gamma.iter().map(|g| ln(*g)).collect();
    let mut data = vec![0.0; n * k];
    let mut quad = vec![0.0; k];
    let mut lin = vec![0.0; k];
    for i in 0..n {
        let hat = state.alpha.row(i);
        for c in 0..k {
            if !(hat[c] > 0.0) {
                return Err(Error::ZeroAnchor { node: i, component: c });
            }
            quad[c] = scores[i * k + c] / (2.0 * hat[c]) - 1.0 / hat[c];
            lin[c] = log_gamma[c] - ln(hat[c]) + 1.0;
        }
        data[i * k..(i + 1) * k].copy_from_slice(&solve_simplex_qp(&quad, &lin, floor));
    }
    Ok(Membership::from_raw(n, k, data))
}

/// Synchronous fixed-point E-step `α_ik ∝ γ_k exp(G[i,k])`.
pub fn e_step_fp(network: &SparseNetwork, state: &VariationalState, floor: f64) -> Result<Membership> {
    check_dims(network, state, &state.alpha)?;
    let (n, k) = (state.alpha.n(), state.alpha.k());
    let log_pi = clamped_log_table(state);
    let mut scores = neighborhood_scores(network, &state.alpha, &log_pi);
    let log_gamma: Vec<f64> = state.gamma.iter().map(|g| ln(*g)).collect();
    for row in scores.chunks_exact_mut(k) {
        for (s, lg) in row.iter_mut().zip(&log_gamma) {
            *s += lg;
        }
        softmax_in_place(row);
        floor_row(row, floor);
    }
    Ok(Membership::from_raw(n, k, scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objective(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
        (0..a.len()).map(|c| a[c] * x[c] * x[c] + b[c] * x[c]).sum()
    }

    #[test]
    fn symmetric_qp() {
        let x = solve_simplex_qp(&[-1.0, -1.0], &[0.0, 0.0], 0.0);
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_variable_qp_matches_reduced_calculus() {
        // With x2 = 1 - x1: f(x1) = -x1² + x1 - (1-x1)² → f'(x1) = -2x1 + 1 + 2(1-x1) = 0 → x1 = 3/4.
        let x = solve_simplex_qp(&[-1.0, -1.0], &[1.0, 0.0], 0.0);
        assert!((x[0] - 0.75).abs() < 1e-14, "{x:?}");
        assert!((x[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn corner_solution_is_floored() {
        let x = solve_simplex_qp(&[-1.0, -1.0, -1.0], &[10.0, 0.0, 0.0], 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-11);
        assert!(x[1] >= 0.999e-12 && x[2] >= 0.999e-12);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qp_beats_vertices_and_center() {
        let a = [-3.0, -0.5, -1.5, -2.0];
        let b = [0.3, -0.2, 0.9, 0.1];
        let x = solve_simplex_qp(&a, &b, 0.0);
        let best = objective(&a, &b, &x);
        for c in 0..4 {
            let mut e = [0.0; 4];
            e[c] = 1.0;
            assert!(best >= objective(&a, &b, &e) - 1e-12);
        }
        assert!(best >= objective(&a, &b, &[0.25; 4]) - 1e-12);
    }
}
