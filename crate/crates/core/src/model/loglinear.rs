//! Weighted log-linear likelihoods over block statistic tables.
//!
//! Both the θ M-step and the inversion from probabilities to natural
//! parameters maximize the concave function
//!
//! ```text
//! f(θ) = θᵀ S − Σ_{k,l} W_kl ψ_kl(θ)
//! ```
//!
//! where `S` is a vector of observed (or target) statistic totals and `W` are
//! block weights. The gradient is `S − Σ W_kl E_θ[t_kl]` and the Hessian is
//! `−Σ W_kl Cov_θ[t_kl]`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{BlockTable, ExpFamBlockModel, TabularBlockModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iters: 100, grad_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest absolute gradient entry over free coordinates at `theta`.
    pub max_abs_gradient: f64,
    pub converged: bool,
    /// Iterations where the Hessian could not be factored and a scaled gradient step was used.
    pub gradient_fallbacks: usize,
}

fn check_weights(model: &ExpFamBlockModel, weights: &[f64]) -> Result<()> {
    let k = model.components();
    if weights.len() != k * k {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} block weights for K={k}",
            weights.len()
        )));
    }
    Ok(())
}

pub fn loglinear_objective(
    model: &ExpFamBlockModel,
    theta: &[f64],
    observed: &[f64],
    weights: &[f64],
) -> f64 {
    let k = model.components();
    let linear: f64 = theta.iter().zip(observed).map(|(a, b)| a * b).sum();
    let mut norm = 0.0;
    for a in 0..k {
        for b in 0..k {
            let w = weights[a * k + b];
            if w != 0.0 {
                norm += w * model.log_norm_at(theta, a, b);
            }
        }
    }
    linear - norm
}

/// Full-length gradient `S − Σ W_kl E_θ[t_kl]`, fixed coordinates included.
pub fn loglinear_gradient(
    model: &ExpFamBlockModel,
    theta: &[f64],
    observed: &[f64],
    weights: &[f64],
) -> Vec<f64> {
    let moments = model.moments_at(theta);
    gradient_from(model, &moments, observed, weights)
}

/// Row-major `p × p` Hessian `−Σ W_kl Cov_θ[t_kl]`.
pub fn loglinear_hessian(model: &ExpFamBlockModel, theta: &[f64], weights: &[f64]) -> Vec<f64> {
    let moments = model.moments_at(theta);
    hessian_from(model, &moments, weights)
}

fn gradient_from(
    model: &ExpFamBlockModel,
    moments: &super::BlockMoments,
    observed: &[f64],
    weights: &[f64],
) -> Vec<f64> {
    let k = model.components();
    let mut g = observed.to_vec();
    for a in 0..k {
        for b in 0..k {
            let w = weights[a * k + b];
            if w == 0.0 {
                continue;
            }
            for (gi, mi) in g.iter_mut().zip(moments.mean(a, b)) {
                *gi -= w * mi;
            }
        }
    }
    g
}

fn hessian_from(model: &ExpFamBlockModel, moments: &super::BlockMoments, weights: &[f64]) -> Vec<f64> {
    let k = model.components();
    let p = model.dim();
    let mut h = vec![0.0; p * p];
    for a in 0..k {
        for b in 0..k {
            let w = weights[a * k + b];
            if w == 0.0 {
                continue;
            }
            for (hi, ci) in h.iter_mut().zip(moments.cov(a, b)) {
                *hi -= w * ci;
            }
        }
    }
    h
}

/// Damped Newton ascent on the free coordinates of `theta_init`.
///
/// Each step is halved until the objective does not decrease, so the returned
/// objective is never below the starting one. When the negated Hessian cannot
/// be Cholesky-factored a diagonally scaled gradient step is taken instead.
pub fn maximize_loglinear(
    model: &ExpFamBlockModel,
    observed: &[f64],
    weights: &[f64],
    theta_init: &[f64],
    options: NewtonOptions,
) -> Result<NewtonReport> {
    check_weights(model, weights)?;
    let p = model.dim();
    if observed.len() != p || theta_init.len() != p {
        return Err(Error::DimensionMismatch(alloc::format!(
            "θ of length {} and statistics of length {} for p={p}",
            theta_init.len(),
            observed.len()
        )));
    }
    let free = model.free_indices();
    let mut theta = theta_init.to_vec();
    let mut objective = loglinear_objective(model, &theta, observed, weights);
    let mut report = NewtonReport {
        theta: Vec::new(),
        objective,
        iterations: 0,
        max_abs_gradient: 0.0,
        converged: false,
        gradient_fallbacks: 0,
    };
    if free.is_empty() {
        report.theta = theta;
        report.converged = true;
        return Ok(report);
    }

    let mut trial = theta.clone();
    loop {
        let moments = model.moments_at(&theta);
        let g = gradient_from(model, &moments, observed, weights);
        let g_free: Vec<f64> = free.iter().map(|&i| g[i]).collect();
        let max_abs = g_free.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        report.max_abs_gradient = max_abs;
        if max_abs < options.grad_tol {
            report.converged = true;
            break;
        }
        if report.iterations >= options.max_iters {
            break;
        }
        report.iterations += 1;

        let h = hessian_from(model, &moments, weights);
        let m = free.len();
        let neg_h = DMatrix::from_fn(m, m, |r, c| -h[free[r] * p + free[c]]);
        let rhs = DVector::from_vec(g_free.clone());
        let direction: Vec<f64> = match neg_h.clone().cholesky() {
            Some(chol) => chol.solve(&rhs).iter().copied().collect(),
            None => {
                report.gradient_fallbacks += 1;
                let scale = 1.0 + (0..m).map(|i| neg_h[(i, i)]).fold(0.0f64, f64::max);
                g_free.iter().map(|x| x / scale).collect()
            }
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            trial.copy_from_slice(&theta);
            for (&i, di) in free.iter().zip(&direction) {
                trial[i] += step * di;
            }
            let value = loglinear_objective(model, &trial, observed, weights);
            if value >= objective {
                objective = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        core::mem::swap(&mut theta, &mut trial);
    }
    report.theta = theta;
    report.objective = objective;
    Ok(report)
}

/// `μ̂ = Σ_{k,l} W_kl Σ_d t_kl(d) π̂_{d;kl}`.
pub fn aggregate_target_stats(family: &ExpFamBlockModel, target: &BlockTable, weights: &[f64]) -> Vec<f64> {
    let k = family.components();
    let mut s = vec![0.0; family.dim()];
    for a in 0..k {
        for b in 0..k {
            let w = weights[a * k + b];
            if w == 0.0 {
                continue;
            }
            for d in family.alphabet().iter() {
                let pw = w * target.get(a, b, d);
                for (si, ti) in s.iter_mut().zip(family.stat(a, b, d)) {
                    *si += pw * ti;
                }
            }
        }
    }
    s
}

/// Natural parameters whose block means match those of `target`.
///
/// Maximizes `θᵀμ̂ − Σ W_kl ψ_kl(θ)` by damped Newton from `θ = 0` on the
/// free coordinates (fixed coordinates keep the family's values). `weights`
/// defaults to one for every block pair.
pub fn invert_mean_parameters(
    target: &TabularBlockModel,
    family: &ExpFamBlockModel,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let k = family.components();
    if target.components() != k || target.alphabet() != family.alphabet() {
        return Err(Error::DimensionMismatch(
            "target and family differ in K or alphabet".into(),
        ));
    }
    let owned;
    let weights = match weights {
        Some(w) => w,
        None => {
            owned = vec![1.0; k * k];
            &owned
        }
    };
    check_weights(family, weights)?;
    for a in 0..k {
        for b in 0..k {
            for d in family.alphabet().iter() {
                if target.prob(a, b, d) <= 0.0 {
                    return Err(Error::ZeroTargetProbability { dyad: d.index(), k: a, l: b });
                }
            }
        }
    }

    let free = family.free_indices();
    let mut start = family.theta().to_vec();
    for &i in &free {
        start[i] = 0.0;
    }
    let p = family.dim();
    let h = loglinear_hessian(family, &start, weights);
    let m = free.len();
    if m > 0 {
        let info = DMatrix::from_fn(m, m, |r, c| -h[free[r] * p + free[c]]);
        let eig = SymmetricEigen::new(info);
        let (mut min_i, mut max_v) = (0, 0.0f64);
        for i in 0..m {
            if eig.eigenvalues[i] < eig.eigenvalues[min_i] {
                min_i = i;
            }
            max_v = max_v.max(eig.eigenvalues[i]);
        }
        if eig.eigenvalues[min_i] <= 1e-10 * max_v.max(1.0) {
            let mut direction = vec![0.0; p];
            for (r, &i) in free.iter().enumerate() {
                direction[i] = eig.eigenvectors[(r, min_i)];
            }
            return Err(Error::NonIdentifiable { direction });
        }
    }

    let observed = aggregate_target_stats(family, target.table(), weights);
    let report = maximize_loglinear(
        family,
        &observed,
        weights,
        &start,
        NewtonOptions { max_iters: 200, grad_tol: 1e-11 },
    )?;
    Ok(report.theta)
}
