use alloc::vec;
use alloc::vec::Vec;

use super::{BlockDyadStats, Membership};
use crate::alphabet::DyadAlphabet;
use crate::model::{
    loglinear_gradient, loglinear_hessian, maximize_loglinear, BlockTable, ExpFamBlockModel,
    NewtonOptions, NewtonReport, TabularBlockModel,
};
use crate::Result;

/// Block pairs whose total weight is at or below this get a uniform `π`.
pub const EMPTY_BLOCK_WEIGHT: f64 = 1e-300;

/// `γ_k = (1/n) Σ_i α_ik`.
pub fn m_step_gamma(alpha: &Membership) -> Vec<f64> {
    let n = alpha.n() as f64;
    alpha.column_sums().into_iter().map(|s| s / n).collect()
}

/// Closed-form `π_{d;kl} = C[d,k,l] / W[k,l]`.
///
/// Returns the model together with the block pairs `(k, l)`, `k ≤ l`, that
/// carried no weight and were set to uniform.
pub fn m_step_pi_tabular(
    stats: &BlockDyadStats,
    alphabet: &DyadAlphabet,
) -> (TabularBlockModel, Vec<(usize, usize)>) {
    let k = stats.components();
    let size = alphabet.size();
    let mut pi = BlockTable::filled(k, size, 0.0);
    let mut empty = Vec::new();
    for a in 0..k {
        for b in a..k {
            let counts = stats.dyad_weights().block(a, b);
            let total: f64 = counts.iter().sum();
            let probs: Vec<f64> = if total > EMPTY_BLOCK_WEIGHT {
                counts.iter().map(|c| c / total).collect()
            } else {
                empty.push((a, b));
                vec![1.0 / size as f64; size]
            };
            for d in alphabet.iter() {
                pi.set(a, b, d, probs[d.index()]);
                pi.set(b, a, alphabet.transpose(d), probs[d.index()]);
            }
        }
    }
    (TabularBlockModel::from_table_unchecked(alphabet.clone(), pi), empty)
}

/// `S = Σ_{k,l,d} C[d,k,l] t_kl(d)`.
pub fn observed_statistics(stats: &BlockDyadStats, model: &ExpFamBlockModel) -> Vec<f64> {
    let k = model.components();
    let mut s = vec![0.0; model.dim()];
    for a in 0..k {
        for b in 0..k {
            for d in model.alphabet().iter() {
                let w = stats.dyad_weight(a, b, d);
                if w == 0.0 {
                    continue;
                }
                for (si, ti) in s.iter_mut().zip(model.stat(a, b, d)) {
                    *si += w * ti;
                }
            }
        }
    }
    s
}

/// Gradient of the lower bound with respect to `θ` at the model's current `θ`.
pub fn lb_theta_gradient(stats: &BlockDyadStats, model: &ExpFamBlockModel) -> Vec<f64> {
    let observed = observed_statistics(stats, model);
    loglinear_gradient(model, model.theta(), &observed, stats.pair_weights())
}

/// Hessian of the lower bound with respect to `θ`, row-major `p × p`.
pub fn lb_theta_hessian(stats: &BlockDyadStats, model: &ExpFamBlockModel) -> Vec<f64> {
    loglinear_hessian(model, model.theta(), stats.pair_weights())
}

/// Damped Newton ascent of the lower bound in `θ` starting from `model`'s `θ`.
pub fn m_step_theta_newton(
    stats: &BlockDyadStats,
    model: &ExpFamBlockModel,
    options: NewtonOptions,
) -> Result<NewtonReport> {
    let observed = observed_statistics(stats, model);
    maximize_loglinear(model, &observed, stats.pair_weights(), model.theta(), options)
}
