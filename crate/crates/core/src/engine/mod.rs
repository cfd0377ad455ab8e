//! Variational generalized EM.
//!
//! A sweep is one E-step (MM or fixed point) followed by one M-step (`γ`,
//! then `π` in closed form or `θ` by damped Newton). Every fit starts with an
//! M-step from its initial `α`.

mod estep;
mod membership;
mod mstep;
mod stats;

use alloc::string::String;
use alloc::vec::Vec;

pub use estep::{e_step_fp, e_step_mm, minorizer_value, solve_simplex_qp, EStepStrategy};
pub use membership::Membership;
pub use mstep::{
    lb_theta_gradient, lb_theta_hessian, m_step_gamma, m_step_pi_tabular, m_step_theta_newton,
    observed_statistics,
};
pub use stats::{accumulate_block_stats, BlockDyadStats};

use crate::model::{DyadModel, NewtonOptions};
use crate::network::SparseNetwork;
use crate::{rng, Error, Result};

/// Current iterate: memberships `α`, mixing weights `γ` and the dyad model.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub alpha: Membership,
    pub gamma: Vec<f64>,
    pub model: DyadModel,
}

impl VariationalState {
    pub fn new(alpha: Membership, gamma: Vec<f64>, model: DyadModel) -> Result<Self> {
        let k = model.components();
        if alpha.k() != k || gamma.len() != k {
            return Err(Error::DimensionMismatch(alloc::format!(
                "α has {} columns and γ {} entries for K={k}",
                alpha.k(),
                gamma.len()
            )));
        }
        let s: f64 = gamma.iter().sum();
        if gamma.iter().any(|g| !(*g >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities("γ is not on the simplex".into()));
        }
        Ok(Self { alpha, gamma, model })
    }

    pub fn components(&self) -> usize {
        self.gamma.len()
    }

    pub fn hard_assignment(&self) -> Vec<usize> {
        self.alpha.hard_assignment()
    }
}

fn check_state(network: &SparseNetwork, state: &VariationalState) -> Result<()> {
    if state.alpha.n() != network.n() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "α has {} rows for {} nodes",
            state.alpha.n(),
            network.n()
        )));
    }
    if state.model.alphabet() != network.alphabet() {
        return Err(Error::DimensionMismatch("model and network alphabets differ".into()));
    }
    Ok(())
}

/// The variational lower bound
/// `Σ_{i<j} Σ_{k,l} α_ik α_jl ln π_{D_ij;kl} + Σ_i Σ_k α_ik (ln γ_k − ln α_ik)`.
///
/// Returns `-inf` when a zero-probability dyad carries weight.
pub fn lower_bound(network: &SparseNetwork, state: &VariationalState) -> Result<f64> {
    check_state(network, state)?;
    let stats = accumulate_block_stats(network, &state.alpha)?;
    Ok(stats::lower_bound_parts(
        &stats,
        &state.model.log_prob_table(),
        &state.alpha,
        &state.gamma,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    pub e_step: EStepStrategy,
    pub newton: NewtonOptions,
    pub seed: u64,
    pub alpha_floor: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 6000,
            rel_tol: 1e-10,
            restarts: 1,
            e_step: EStepStrategy::Mm,
            newton: NewtonOptions::default(),
            seed: 0,
            alpha_floor: 1e-12,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("at least one restart is required".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidConfig("rel_tol must be nonnegative".into()));
        }
        if !(self.alpha_floor >= 0.0 && self.alpha_floor < 1e-3) {
            return Err(Error::InvalidConfig("alpha_floor must lie in [0, 1e-3)".into()));
        }
        Ok(())
    }
}

/// A condition noticed during a fit, merged over the sweeps where it recurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// One of `empty-component`, `empty-block`, `newton-not-converged`,
    /// `newton-gradient-fallback`, `e-step-rejected`, `lb-decrease`,
    /// `degenerate-empty-network`.
    pub kind: &'static str,
    pub detail: String,
    pub first_sweep: usize,
    pub last_sweep: usize,
    pub count: usize,
}

#[derive(Debug, Default, Clone)]
struct DiagnosticLog(Vec<Diagnostic>);

impl DiagnosticLog {
    fn push(&mut self, kind: &'static str, detail: String, sweep: usize) {
        if let Some(d) = self.0.iter_mut().find(|d| d.kind == kind && d.detail == detail) {
            d.last_sweep = sweep;
            d.count += 1;
            return;
        }
        self.0.push(Diagnostic { kind, detail, first_sweep: sweep, last_sweep: sweep, count: 1 });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub state: VariationalState,
    pub lb: f64,
    /// Lower bound after the initial M-step.
    pub initial_lb: f64,
    /// Lower bound after each full sweep.
    pub lb_trace: Vec<f64>,
    /// Lower bound after the E-step of each sweep, before its M-step.
    pub e_step_trace: Vec<f64>,
    pub hard_assignment: Vec<usize>,
    pub sweeps_used: usize,
    pub restart_index: usize,
    pub converged: bool,
    /// Final lower bound of every restart, in restart order.
    pub restart_lbs: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Updates `γ` and the model parameters for memberships `alpha`.
///
/// `current` supplies the alphabet, the family and, for log-linear models,
/// the Newton starting point. Returns the new state with its lower bound.
pub fn m_step(
    network: &SparseNetwork,
    alpha: Membership,
    current: &DyadModel,
    newton: NewtonOptions,
) -> Result<(VariationalState, f64)> {
    let mut log = DiagnosticLog::default();
    let (state, stats) = m_step_logged(network, alpha, current, newton, &mut log, 0)?;
    let lb = stats::lower_bound_parts(&stats, &state.model.log_prob_table(), &state.alpha, &state.gamma);
    Ok((state, lb))
}

fn m_step_logged(
    network: &SparseNetwork,
    alpha: Membership,
    current: &DyadModel,
    newton: NewtonOptions,
    log: &mut DiagnosticLog,
    sweep: usize,
) -> Result<(VariationalState, BlockDyadStats)> {
    let stats = accumulate_block_stats(network, &alpha)?;
    let gamma = m_step_gamma(&alpha);
    let n = alpha.n() as f64;
    for (c, s) in stats.col_sum().iter().enumerate() {
        if *s < 1e-8 * n {
            log.push("empty-component", alloc::format!("component {c}"), sweep);
        }
    }
    let model = match current {
        DyadModel::Tabular(_) => {
            let (pi, empty) = m_step_pi_tabular(&stats, network.alphabet());
            for (k, l) in empty {
                log.push("empty-block", alloc::format!("block ({k}, {l}) set uniform"), sweep);
            }
            DyadModel::Tabular(pi)
        }
        DyadModel::ExpFam(m) => {
            let report = m_step_theta_newton(&stats, m, newton)?;
            if !report.converged {
                log.push("newton-not-converged", String::new(), sweep);
            }
            if report.gradient_fallbacks > 0 {
                log.push("newton-gradient-fallback", String::new(), sweep);
            }
            DyadModel::ExpFam(m.clone().with_theta(&report.theta)?)
        }
    };
    Ok((VariationalState { alpha, gamma, model }, stats))
}

fn e_step(network: &SparseNetwork, state: &VariationalState, config: &FitConfig) -> Result<Membership> {
    match config.e_step {
        EStepStrategy::Mm => e_step_mm(network, state, config.alpha_floor),
        EStepStrategy::Fp => e_step_fp(network, state, config.alpha_floor),
    }
}

/// Runs one restart from `alpha`, beginning with an M-step.
pub fn fit_from_alpha(
    network: &SparseNetwork,
    template: &DyadModel,
    mut alpha: Membership,
    config: &FitConfig,
    max_sweeps: usize,
) -> Result<FitResult> {
    config.validate()?;
    let k = template.components();
    if template.alphabet() != network.alphabet() {
        return Err(Error::DimensionMismatch("model and network alphabets differ".into()));
    }
    if alpha.n() != network.n() || alpha.k() != k {
        return Err(Error::DimensionMismatch(alloc::format!(
            "initial α is {}×{} for n={}, K={k}",
            alpha.n(),
            alpha.k(),
            network.n()
        )));
    }
    if k > network.n() {
        return Err(Error::TooManyComponents { k, n: network.n() });
    }
    alpha.apply_floor(config.alpha_floor);

    let mut log = DiagnosticLog::default();
    if network.nonbaseline_count() == 0 && matches!(template, DyadModel::ExpFam(_)) {
        log.push(
            "degenerate-empty-network",
            "no nonbaseline dyads; natural parameters drift toward the boundary".into(),
            0,
        );
    }
    let (mut state, stats) = m_step_logged(network, alpha, template, config.newton, &mut log, 0)?;
    let mut lb = stats::lower_bound_parts(&stats, &state.model.log_prob_table(), &state.alpha, &state.gamma);
    let initial_lb = lb;
    let mut lb_trace = Vec::new();
    let mut e_step_trace = Vec::new();
    let mut converged = false;

    for sweep in 1..=max_sweeps {
        let old_log_pi = state.model.log_prob_table();
        let candidate = e_step(network, &state, config)?;
        let cand_stats = accumulate_block_stats(network, &candidate)?;
        let mut lb_e = stats::lower_bound_parts(&cand_stats, &old_log_pi, &candidate, &state.gamma);
        let alpha = if config.e_step == EStepStrategy::Mm && lb_e < lb {
            // Rounding in the floor can undo the guaranteed ascent; keep the anchor instead.
            log.push("e-step-rejected", String::new(), sweep);
            lb_e = lb;
            state.alpha.clone()
        } else {
            if lb_e < lb - 1e-9 * lb.abs().max(1.0) {
                log.push("lb-decrease", "after E-step".into(), sweep);
            }
            candidate
        };
        e_step_trace.push(lb_e);

        let (next, next_stats) = m_step_logged(network, alpha, &state.model, config.newton, &mut log, sweep)?;
        let next_lb =
            stats::lower_bound_parts(&next_stats, &next.model.log_prob_table(), &next.alpha, &next.gamma);
        lb_trace.push(next_lb);
        let change = (next_lb - lb).abs();
        state = next;
        lb = next_lb;
        if change == 0.0 || change < config.rel_tol * lb.abs() {
            converged = true;
            break;
        }
    }

    let hard_assignment = state.alpha.hard_assignment();
    Ok(FitResult {
        sweeps_used: lb_trace.len(),
        state,
        lb,
        initial_lb,
        lb_trace,
        e_step_trace,
        hard_assignment,
        restart_index: 0,
        converged,
        restart_lbs: Vec::new(),
        diagnostics: log.0,
    })
}

/// Seed of the random starting `α` for restart `r`.
pub fn restart_seed(seed: u64, r: usize) -> u64 {
    rng::derive_seed(seed, rng::INIT_BASE + r as u64)
}

/// Restart `r` of [`fit`]: random `α`, then [`fit_from_alpha`].
pub fn fit_restart(
    network: &SparseNetwork,
    template: &DyadModel,
    config: &FitConfig,
    r: usize,
) -> Result<FitResult> {
    let k = template.components();
    if k > network.n() {
        return Err(Error::TooManyComponents { k, n: network.n() });
    }
    let alpha = Membership::random(network.n(), k, restart_seed(config.seed, r));
    let mut result = fit_from_alpha(network, template, alpha, config, config.max_sweeps)?;
    result.restart_index = r;
    Ok(result)
}

/// The run with the highest final lower bound; the lowest restart index wins ties.
pub fn select_best(runs: Vec<FitResult>) -> Option<FitResult> {
    let restart_lbs: Vec<f64> = runs.iter().map(|r| r.lb).collect();
    let mut best: Option<FitResult> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some(b) => run.lb > b.lb || (b.lb.is_nan() && !run.lb.is_nan()),
        };
        if better {
            best = Some(run);
        }
    }
    best.map(|mut b| {
        b.restart_lbs = restart_lbs;
        b
    })
}

/// Fits `config.restarts` random starts sequentially and keeps the best.
pub fn fit(network: &SparseNetwork, template: &DyadModel, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let mut runs = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        runs.push(fit_restart(network, template, config, r)?);
    }
    Ok(select_best(runs).expect("at least one restart"))
}
