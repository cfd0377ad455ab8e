//! Thread-pool drivers for restarts, bootstrap replicates and comparison runs.
//!
//! Work items carry their own derived seeds and results are gathered in index
//! order, so outputs do not depend on the number of workers.

use blockmix_core::bootstrap::{bootstrap_replicate, summarize, BootstrapConfig, BootstrapResult, BootstrapTarget};
use blockmix_core::engine::{
    fit_from_alpha, fit_restart, restart_seed, select_best, EStepStrategy, FitConfig, FitResult, Membership,
};
use blockmix_core::model::DyadModel;
use blockmix_core::SparseNetwork;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};

/// A pool of `jobs` workers; 0 means one per available core.
pub fn pool(jobs: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))
}

/// All restarts of a fit, keeping the best.
pub fn fit(pool: &ThreadPool, network: &SparseNetwork, template: &DyadModel, config: &FitConfig) -> Result<FitResult> {
    if config.restarts == 0 {
        return Err(blockmix_core::Error::InvalidConfig("at least one restart is required".into()).into());
    }
    let runs = pool.install(|| {
        (0..config.restarts)
            .into_par_iter()
            .map(|r| fit_restart(network, template, config, r))
            .collect::<blockmix_core::Result<Vec<_>>>()
    })?;
    Ok(select_best(runs).expect("at least one restart"))
}

pub fn bootstrap(
    pool: &ThreadPool,
    target: &BootstrapTarget,
    fit_config: &FitConfig,
    config: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let replicates = pool.install(|| {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| bootstrap_replicate(target, fit_config, config, r))
            .collect::<Vec<_>>()
    });
    Ok(summarize(target, config, replicates)?)
}

/// Runs every strategy from the same random starts with the same sweep budget.
///
/// Run `r` starts from the `α` that restart `r` of a fit with `config.seed`
/// would use. Results are indexed `[strategy][run]`.
pub fn compare(
    pool: &ThreadPool,
    network: &SparseNetwork,
    template: &DyadModel,
    config: &FitConfig,
    strategies: &[EStepStrategy],
    runs: usize,
) -> Result<Vec<Vec<FitResult>>> {
    let k = template.components();
    let jobs: Vec<(usize, usize)> = (0..strategies.len()).flat_map(|s| (0..runs).map(move |r| (s, r))).collect();
    let done = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, r)| {
                let alpha = Membership::random(network.n(), k, restart_seed(config.seed, r));
                let cfg = FitConfig { e_step: strategies[s], ..*config };
                fit_from_alpha(network, template, alpha, &cfg, cfg.max_sweeps).map(|mut f| {
                    f.restart_index = r;
                    f
                })
            })
            .collect::<blockmix_core::Result<Vec<_>>>()
    })?;
    let mut out: Vec<Vec<FitResult>> = strategies.iter().map(|_| Vec::with_capacity(runs)).collect();
    for ((s, _), f) in jobs.into_iter().zip(done) {
        out[s].push(f);
    }
    Ok(out)
}
