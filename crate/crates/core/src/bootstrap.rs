//! Parametric bootstrap with label-anchored refits.
//!
//! Each replicate simulates a network from the fitted `γ` and model, anchors
//! `α` at the simulated memberships so the refit cannot switch labels, and
//! refits starting from an M-step. Replicate `r` draws everything from the
//! seed `derive_seed(seed, REPLICATE_BASE + r)`, so replicates can run in any
//! order or in parallel and be gathered afterwards with [`summarize`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{fit_from_alpha, FitConfig, FitResult, Membership};
use crate::math::sqrt;
use crate::model::DyadModel;
use crate::rng;
use crate::simulate::{sample_network, SimSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub refit_max_sweeps: usize,
    pub anchor_epsilon: f64,
    pub ci_levels: (f64, f64),
    pub seed: u64,
    /// Relabel simulated nodes; the anchor follows the permuted truth.
    pub relabel: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 500,
            refit_max_sweeps: 1000,
            anchor_epsilon: 1e-10,
            ci_levels: (0.025, 0.975),
            seed: 0,
            relabel: true,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ci_levels;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidConfig(format!("bad interval levels ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub index: usize,
    pub seed: u64,
    /// Model parameters followed by `γ`; NaN when the refit errored.
    pub parameters: Vec<f64>,
    pub lb: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    pub error: Option<String>,
}

impl Replicate {
    pub fn failed(&self) -> bool {
        !self.converged || self.parameters.iter().any(|x| !x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub names: Vec<String>,
    pub estimate: Vec<f64>,
    pub replicates: Vec<Replicate>,
    /// Indices of replicates excluded from the summaries.
    pub failures: Vec<usize>,
    /// Percentile intervals; empty when no replicate succeeded.
    pub intervals: Vec<Interval>,
    pub std_errors: Vec<f64>,
    /// More than 20% of replicates failed.
    pub warning: bool,
}

/// What a bootstrap resamples from: the node count and fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapTarget {
    pub n: usize,
    pub gamma: Vec<f64>,
    pub model: DyadModel,
}

impl From<&FitResult> for BootstrapTarget {
    fn from(fit: &FitResult) -> Self {
        Self { n: fit.state.alpha.n(), gamma: fit.state.gamma.clone(), model: fit.state.model.clone() }
    }
}

/// `ε` off the true component and `1 − (K−1)ε` on it.
pub fn anchor_alpha(assignment: &[usize], k: usize, epsilon: f64) -> Result<Membership> {
    Membership::anchored(assignment, k, epsilon)
}

pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    rng::derive_seed(seed, rng::REPLICATE_BASE + r as u64)
}

/// Names of the reported coordinates: model parameters then `gamma_1..gamma_K`.
pub fn parameter_names(model: &DyadModel) -> Vec<String> {
    let mut names = model.parameter_names();
    names.extend((1..=model.components()).map(|c| format!("gamma_{c}")));
    names
}

fn parameters(model: &DyadModel, gamma: &[f64]) -> Vec<f64> {
    let mut p = model.parameter_vector();
    p.extend_from_slice(gamma);
    p
}

/// Simulates and refits replicate `r` of the bootstrap around `target`.
pub fn bootstrap_replicate(
    target: &BootstrapTarget,
    fit_config: &FitConfig,
    config: &BootstrapConfig,
    r: usize,
) -> Replicate {
    let seed = replicate_seed(config.seed, r);
    let width = parameters(&target.model, &target.gamma).len();
    let outcome = (|| {
        let spec = SimSpec {
            n: target.n,
            gamma: target.gamma.clone(),
            model: target.model.clone(),
            seed,
            relabel: config.relabel,
        };
        let sim = sample_network(&spec)?;
        let alpha = anchor_alpha(&sim.assignment, spec.gamma.len(), config.anchor_epsilon)?;
        fit_from_alpha(&sim.network, &target.model, alpha, fit_config, config.refit_max_sweeps)
    })();
    match outcome {
        Ok(refit) => Replicate {
            index: r,
            seed,
            parameters: parameters(&refit.state.model, &refit.state.gamma),
            lb: refit.lb,
            sweeps_used: refit.sweeps_used,
            converged: refit.converged,
            error: None,
        },
        Err(e) => Replicate {
            index: r,
            seed,
            parameters: vec![f64::NAN; width],
            lb: f64::NAN,
            sweeps_used: 0,
            converged: false,
            error: Some(format!("{e}")),
        },
    }
}

/// Type-7 sample quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Percentile intervals and standard errors over the successful replicates.
pub fn summarize(
    target: &BootstrapTarget,
    config: &BootstrapConfig,
    mut replicates: Vec<Replicate>,
) -> Result<BootstrapResult> {
    config.validate()?;
    replicates.sort_by_key(|r| r.index);
    let names = parameter_names(&target.model);
    let estimate = parameters(&target.model, &target.gamma);
    let failures: Vec<usize> = replicates.iter().filter(|r| r.failed()).map(|r| r.index).collect();
    let good: Vec<&Replicate> = replicates.iter().filter(|r| !r.failed()).collect();
    let mut intervals = Vec::new();
    let mut std_errors = Vec::new();
    if !good.is_empty() {
        for c in 0..estimate.len() {
            let mut column: Vec<f64> = good.iter().map(|r| r.parameters[c]).collect();
            column.sort_by(f64::total_cmp);
            intervals.push(Interval {
                lower: quantile(&column, config.ci_levels.0),
                upper: quantile(&column, config.ci_levels.1),
            });
            let m = column.len() as f64;
            let mean = column.iter().sum::<f64>() / m;
            let ss: f64 = column.iter().map(|x| (x - mean) * (x - mean)).sum();
            std_errors.push(if column.len() > 1 { sqrt(ss / (m - 1.0)) } else { 0.0 });
        }
    }
    let warning = failures.len() * 5 > replicates.len();
    Ok(BootstrapResult { names, estimate, replicates, failures, intervals, std_errors, warning })
}

/// All replicates in order, then [`summarize`].
pub fn run_bootstrap(
    target: &BootstrapTarget,
    fit_config: &FitConfig,
    config: &BootstrapConfig,
) -> Result<BootstrapResult> {
    config.validate()?;
    let replicates = (0..config.replicates)
        .map(|r| bootstrap_replicate(target, fit_config, config, r))
        .collect();
    summarize(target, config, replicates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_rows() {
        let a = anchor_alpha(&[1], 5, 1e-10).unwrap();
        assert_eq!(a.row(0), &[1e-10, 1.0 - 4e-10, 1e-10, 1e-10, 1e-10]);
        let one = anchor_alpha(&[0, 0], 1, 1e-10).unwrap();
        assert_eq!(one.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn type7_quantiles() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&x, 0.0), 1.0);
        assert_eq!(quantile(&x, 1.0), 4.0);
        assert!((quantile(&x, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&x, 0.25) - 1.75).abs() < 1e-15);
    }
}
