mod common;

use blockmix_core::model::{DyadModel, TabularBlockModel};
use blockmix_core::rng;
use blockmix_core::simulate::{sample_distinct_pairs, sample_memberships, sample_network, SimSpec};
use blockmix_core::{DyadAlphabet, EdgeAlphabet};

fn spec(model: TabularBlockModel, gamma: Vec<f64>, n: usize, seed: u64) -> SimSpec {
    SimSpec { n, gamma, model: DyadModel::Tabular(model), seed, relabel: false }
}

#[test]
fn block_size_mean_matches_binomial() {
    let n = 100_000;
    let reps = 200;
    let mut total = 0.0;
    for r in 0..reps {
        let mut g = rng::derive(r, 0);
        let (sizes, assignment) = sample_memberships(&[0.3, 0.7], n, &mut g).unwrap();
        assert_eq!(sizes.iter().sum::<usize>(), n);
        assert!(assignment[..sizes[0]].iter().all(|&c| c == 0));
        total += sizes[0] as f64 / n as f64;
    }
    let mean = total / reps as f64;
    let se = (0.3f64 * 0.7 / n as f64 / reps as f64).sqrt();
    assert!((mean - 0.3).abs() < 4.0 * se, "{mean}");
}

#[test]
fn cross_pairs_are_uniform() {
    // Blocks of sizes 4 and 5 occupy nodes 0..4 and 4..9.
    let reps = 100_000;
    let mut counts = [[0u32; 5]; 4];
    let mut g = rng::derive(77, 0);
    for _ in 0..reps {
        let pairs = sample_distinct_pairs(0..4, 4..9, 3, &mut g).unwrap();
        assert_eq!(pairs.len(), 3);
        for (i, j) in pairs {
            counts[i][j - 4] += 1;
        }
    }
    let p = 3.0 / 20.0;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    for row in counts {
        for c in row {
            let freq = c as f64 / reps as f64;
            assert!((freq - p).abs() < 4.0 * se, "{freq}");
        }
    }
}

#[test]
fn baseline_only_model_is_empty() {
    let a = DyadAlphabet::directed(EdgeAlphabet::signed());
    let m = TabularBlockModel::from_upper(2, a.clone(), |_, _| {
        let mut v = vec![0.0; 9];
        v[a.baseline().index()] = 1.0;
        v
    })
    .unwrap();
    let sim = sample_network(&spec(m, vec![0.5, 0.5], 1000, 1)).unwrap();
    assert_eq!(sim.network.nonbaseline_count(), 0);
}

#[test]
fn two_nodes_bernoulli() {
    let a = DyadAlphabet::directed(EdgeAlphabet::binary());
    let d0 = a.from_labels(1, 0).unwrap();
    // Single block: the (1,0) and (0,1) orientations share the 0.5 nonbaseline mass.
    let m = TabularBlockModel::from_upper(1, a.clone(), |_, _| {
        let mut v = vec![0.0; 4];
        v[a.baseline().index()] = 0.5;
        v[d0.index()] = 0.25;
        v[a.transpose(d0).index()] = 0.25;
        v
    })
    .unwrap();
    let reps = 10_000;
    let mut present = 0;
    for seed in 0..reps {
        let sim = sample_network(&spec(m.clone(), vec![1.0], 2, seed)).unwrap();
        if sim.network.nonbaseline_count() == 1 {
            present += 1;
            let d = sim.network.dyad(0, 1);
            assert!(d == d0 || d == a.transpose(d0));
        }
    }
    let freq = present as f64 / reps as f64;
    assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / reps as f64).sqrt(), "{freq}");
}

#[test]
fn undirected_single_value_is_always_that_value() {
    let a = DyadAlphabet::undirected(EdgeAlphabet::binary());
    let edge = a.from_labels(1, 1).unwrap();
    let m = TabularBlockModel::from_upper(1, a.clone(), |_, _| vec![0.5, 0.5]).unwrap();
    for seed in 0..200 {
        let sim = sample_network(&spec(m.clone(), vec![1.0], 2, seed)).unwrap();
        if sim.network.nonbaseline_count() == 1 {
            assert_eq!(sim.network.dyad(0, 1), edge);
        }
    }
}

#[test]
fn dense_block_samples_every_pair() {
    let a = DyadAlphabet::undirected(EdgeAlphabet::binary());
    let m = TabularBlockModel::from_upper(1, a, |_, _| vec![0.0, 1.0]).unwrap();
    let sim = sample_network(&spec(m, vec![1.0], 30, 4)).unwrap();
    assert_eq!(sim.network.nonbaseline_count(), 435);
}

#[test]
fn relabeling_keeps_memberships_consistent() {
    let a = DyadAlphabet::undirected(EdgeAlphabet::binary());
    // Edges only inside blocks, so every edge must join nodes with equal labels.
    let m = TabularBlockModel::from_upper(3, a, |x, y| if x == y { vec![0.7, 0.3] } else { vec![1.0, 0.0] }).unwrap();
    let mut s = spec(m, vec![0.2, 0.3, 0.5], 300, 8);
    s.relabel = true;
    let sim = sample_network(&s).unwrap();
    assert!(sim.network.nonbaseline_count() > 0);
    for e in sim.network.pairs() {
        assert_eq!(sim.assignment[e.i as usize], sim.assignment[e.j as usize]);
    }
    let mut sizes = vec![0; 3];
    for &c in &sim.assignment {
        sizes[c] += 1;
    }
    assert_eq!(sizes, sim.block_sizes);
    // Contiguous layout would put block 0 first.
    assert!(sim.assignment[..sim.block_sizes[0]].iter().any(|&c| c != 0));
}

#[test]
fn identical_specs_give_identical_networks() {
    let a = DyadAlphabet::directed(EdgeAlphabet::signed());
    let m = common::random_tabular(2, &a, &mut common::rng(5));
    let s = spec(m, vec![0.4, 0.6], 500, 12);
    let x = sample_network(&s).unwrap();
    assert_eq!(x, sample_network(&s).unwrap());
    let mut other = s.clone();
    other.seed = 13;
    assert_ne!(x.network, sample_network(&other).unwrap().network);
}
