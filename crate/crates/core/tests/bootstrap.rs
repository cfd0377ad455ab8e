use blockmix_core::bootstrap::{run_bootstrap, summarize, BootstrapConfig, BootstrapTarget};
use blockmix_core::engine::{fit_from_alpha, FitConfig, Membership};
use blockmix_core::model::{DyadModel, TabularBlockModel};
use blockmix_core::simulate::{sample_network, SimSpec};
use blockmix_core::{DyadAlphabet, EdgeAlphabet};

fn planted_fit() -> BootstrapTarget {
    let a = DyadAlphabet::undirected(EdgeAlphabet::binary());
    let model = TabularBlockModel::from_upper(2, a.clone(), |x, y| if x == y { vec![0.8, 0.2] } else { vec![0.99, 0.01] })
        .unwrap();
    let sim = sample_network(&SimSpec {
        n: 150,
        gamma: vec![0.5, 0.5],
        model: DyadModel::Tabular(model),
        seed: 1,
        relabel: false,
    })
    .unwrap();
    // Random starts can settle on the single-block fixed point at this size,
    // so start from the planted labels.
    let template = DyadModel::Tabular(TabularBlockModel::uniform(2, a));
    let alpha = Membership::anchored(&sim.assignment, 2, 1e-10).unwrap();
    let config = FitConfig::default();
    BootstrapTarget::from(&fit_from_alpha(&sim.network, &template, alpha, &config, config.max_sweeps).unwrap())
}

#[test]
fn zero_replicates_give_an_empty_result() {
    let fit = planted_fit();
    let config = BootstrapConfig { replicates: 0, ..BootstrapConfig::default() };
    let result = run_bootstrap(&fit, &FitConfig::default(), &config).unwrap();
    assert!(result.replicates.is_empty());
    assert!(result.intervals.is_empty());
    assert!(!result.warning);
}

#[test]
fn replicates_are_deterministic_and_independent() {
    let fit = planted_fit();
    let fit_config = FitConfig::default();
    let config = BootstrapConfig { replicates: 6, seed: 3, ..BootstrapConfig::default() };
    let first = run_bootstrap(&fit, &fit_config, &config).unwrap();
    assert_eq!(first, run_bootstrap(&fit, &fit_config, &config).unwrap());
    assert!(first.failures.is_empty());

    // Dropping a replicate leaves the others untouched, in any gathering order.
    let mut subset: Vec<_> = first.replicates.iter().filter(|r| r.index != 2).cloned().collect();
    subset.reverse();
    let partial = summarize(&fit, &config, subset).unwrap();
    let kept: Vec<_> = first.replicates.iter().filter(|r| r.index != 2).cloned().collect();
    assert_eq!(partial.replicates, kept);

    // Wider levels never give narrower intervals.
    let wide = summarize(&fit, &BootstrapConfig { ci_levels: (0.01, 0.99), ..config }, first.replicates.clone()).unwrap();
    for (w, n) in wide.intervals.iter().zip(&first.intervals) {
        assert!(w.lower <= n.lower && w.upper >= n.upper);
    }
}

#[test]
fn anchored_refits_do_not_switch_labels() {
    let fit = planted_fit();
    let config = BootstrapConfig { replicates: 5, seed: 9, ..BootstrapConfig::default() };
    let result = run_bootstrap(&fit, &FitConfig::default(), &config).unwrap();
    // Parameters are π[0,0], π[0,1], π[1,1] over (0, 1), then γ. The in-block
    // edge probability must stay on the diagonal blocks in every replicate.
    let names = &result.names;
    let edge_00 = names.iter().position(|s| s == "pi[1,1][1]").unwrap();
    let edge_01 = names.iter().position(|s| s == "pi[1,2][1]").unwrap();
    for r in &result.replicates {
        assert!(r.parameters[edge_00] > 5.0 * r.parameters[edge_01], "{names:?} {:?}", r.parameters);
    }
}
