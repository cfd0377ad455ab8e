use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use blockmix::formats::{to_json, BootstrapDoc, FitDoc, ModelDoc};
use blockmix_core::model::{DyadModel, TabularBlockModel};
use blockmix_core::{DyadAlphabet, EdgeAlphabet};
use tempfile::TempDir;

fn blockmix(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_blockmix"))
        .args(args)
        .env_remove("BLOCKMIX_JOBS")
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn two_block_params(dir: &Path, p_in: f64, p_out: f64) -> PathBuf {
    let a = DyadAlphabet::undirected(EdgeAlphabet::binary());
    let m = TabularBlockModel::from_upper(2, a, |x, y| {
        let p = if x == y { p_in } else { p_out };
        vec![1.0 - p, p]
    })
    .unwrap();
    let doc = ModelDoc::new(&[0.5, 0.5], &DyadModel::Tabular(m), None).unwrap();
    let p = dir.join("model.json");
    fs::write(&p, to_json(&doc)).unwrap();
    p
}

fn simulate_planted(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let params = two_block_params(dir, 0.5, 0.02);
    let out = dir.join(format!("sim{seed}"));
    let (code, err) = blockmix(&[
        "simulate", "--params", path(&params), "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", path(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    out.join("network.tsv")
}

#[test]
fn single_component_fit_has_unit_memberships() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "g.tsv", "0\t1\t1\n1\t0\t1\n2\t0\t1\n");
    let out = dir.path().join("fit");
    let (code, err) = blockmix(&["fit", "--input", path(&input), "--K", "1", "--restarts", "2", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("membership.csv")).unwrap();
    assert_eq!(csv, "node_id,alpha_1,hard_assignment\n0,1,1\n1,1,1\n2,1,1\n");
    let files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 3);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn reported_bound_is_the_best_restart() {
    let dir = TempDir::new().unwrap();
    let input = simulate_planted(dir.path(), 60, 4);
    let out = dir.path().join("fit");
    let (code, err) = blockmix(&["fit", "--input", path(&input), "--K", "2", "--restarts", "5", "--seed", "9", "--out", path(&out)]);
    assert!(code == 0 || code == 2, "{err}");
    let doc: FitDoc = serde_json::from_slice(&fs::read(out.join("fit.json")).unwrap()).unwrap();
    let lbs: Vec<f64> = doc.restart_lbs.iter().map(|x| x.unwrap()).collect();
    assert_eq!(lbs.len(), 5);
    let best = lbs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(doc.lb.unwrap(), best);
    assert_eq!(lbs[doc.restart_index], best);
}

#[test]
fn usage_and_input_errors_have_distinct_statuses() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "g.tsv", "0 1 1\n");
    let out = dir.path().join("o");
    assert_eq!(blockmix(&["fit", "--input", path(&input), "--out", path(&out)]).0, 64);
    assert_eq!(blockmix(&["fit", "--input", path(&input), "--K", "1", "--bogus", "--out", path(&out)]).0, 64);
    assert_eq!(blockmix(&["fit", "--input", path(&input), "--K", "x", "--out", path(&out)]).0, 64);
    assert_eq!(blockmix(&["fit", "--input", "/nonexistent/g.tsv", "--K", "1", "--out", path(&out)]).0, 66);
    let bad = write(dir.path(), "bad.tsv", "0 1 1\n0 1 1\n");
    let (code, err) = blockmix(&["fit", "--input", path(&bad), "--K", "1", "--out", path(&out)]);
    assert_eq!(code, 65);
    assert!(err.contains(":2:"), "{err}");
    assert_eq!(blockmix(&["bootstrap", "--out", path(&out)]).0, 64);
    assert!(!out.exists());
}

#[test]
fn sweep_limit_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let input = simulate_planted(dir.path(), 40, 1);
    let out = dir.path().join("fit");
    let (code, _) = blockmix(&[
        "fit", "--input", path(&input), "--K", "2", "--max-sweeps", "1", "--rel-tol", "0", "--out", path(&out),
    ]);
    assert_eq!(code, 2);
    assert!(out.join("fit.json").exists());
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "g.tsv", "0 1 1\n1 2 1\n");
    let cfg = write(dir.path(), "run.cfg", &format!("# defaults\ninput = {}\nK = 1\nrestarts = 3\nseed = 5\n", path(&input)));
    let out = dir.path().join("fit");
    let (code, err) = blockmix(&["fit", "--config", path(&cfg), "--seed", "8", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["restarts"], "3");
    assert_eq!(manifest["config"]["seed"], "8");
    assert_eq!(manifest["config"]["max-sweeps"], "6000");
    assert_eq!(manifest["seed"], 8);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let bad = write(dir.path(), "bad.cfg", "colour = red\n");
    assert_eq!(blockmix(&["fit", "--config", path(&bad), "--input", path(&input), "--K", "1", "--out", path(&out)]).0, 64);
}

#[test]
fn empty_model_simulates_a_header_only_file() {
    let dir = TempDir::new().unwrap();
    let params = two_block_params(dir.path(), 0.0, 0.0);
    let out = dir.path().join("sim");
    let (code, err) = blockmix(&["simulate", "--params", path(&params), "--n", "7", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read_to_string(out.join("network.tsv")).unwrap(), "#n=7\n#directed=0\n");
    assert_eq!(fs::read_to_string(out.join("truth.csv")).unwrap().lines().count(), 8);
    assert_eq!(blockmix(&["simulate", "--params", path(&params), "--out", path(&out)]).0, 64);
}

#[test]
fn simulate_accepts_a_fit_document() {
    let dir = TempDir::new().unwrap();
    let input = simulate_planted(dir.path(), 30, 2);
    let fit = dir.path().join("fit");
    let (code, err) = blockmix(&["fit", "--input", path(&input), "--K", "2", "--restarts", "1", "--out", path(&fit)]);
    assert!(code == 0 || code == 2, "{err}");
    let out = dir.path().join("again");
    let (code, err) = blockmix(&["simulate", "--params", path(&fit.join("fit.json")), "--seed", "3", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(out.join("network.tsv")).unwrap();
    assert!(text.starts_with("#n=30\n"));
}

#[test]
fn bootstrap_outputs_do_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let input = simulate_planted(dir.path(), 40, 6);
    let fit = dir.path().join("fit");
    let (code, err) = blockmix(&["fit", "--input", path(&input), "--K", "2", "--restarts", "3", "--out", path(&fit)]);
    assert!(code == 0 || code == 2, "{err}");
    let fit_json = fit.join("fit.json");

    let mut runs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("boot{jobs}"));
        let (code, err) = blockmix(&[
            "bootstrap", "--fit", path(&fit_json), "--B", "6", "--seed", "2", "--jobs", jobs,
            "--refit-max-sweeps", "200", "--out", path(&out),
        ]);
        assert_eq!(code, 0, "{err}");
        runs.push((fs::read(out.join("samples.csv")).unwrap(), fs::read(out.join("bootstrap.json")).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    let samples = String::from_utf8(runs[0].0.clone()).unwrap();
    assert_eq!(samples.lines().count(), 7);

    let out = dir.path().join("empty");
    let (code, err) = blockmix(&["bootstrap", "--fit", path(&fit_json), "--B", "0", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let doc: BootstrapDoc = serde_json::from_slice(&fs::read(out.join("bootstrap.json")).unwrap()).unwrap();
    assert_eq!(doc.replicates, 0);
    assert!(doc.parameters.iter().all(|p| p.lower.is_none() && p.upper.is_none()));
}

fn read_traces(file: &Path) -> Vec<(String, usize, usize, f64)> {
    let mut r = csv::Reader::from_path(file).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["strategy", "run", "sweep", "lb"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].parse().unwrap(), rec[2].parse().unwrap(), rec[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn compare_on_one_component_gives_matching_single_points() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "g.tsv", "0 1 1\n1 2 1\n3 1 1\n");
    let out = dir.path().join("cmp");
    let (code, err) = blockmix(&["compare", "--input", path(&input), "--K", "1", "--runs", "1", "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let rows = read_traces(&out.join("traces.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].0.as_str(), rows[1].0.as_str()), ("mm", "fp"));
    assert_eq!(rows[0].3, rows[1].3);
}

#[test]
fn compare_mm_traces_never_decrease() {
    let dir = TempDir::new().unwrap();
    let input = simulate_planted(dir.path(), 50, 8);
    let out = dir.path().join("cmp");
    let (code, err) = blockmix(&[
        "compare", "--input", path(&input), "--K", "3", "--runs", "4", "--budget-sweeps", "30", "--out", path(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = read_traces(&out.join("traces.csv"));
    let mut series = std::collections::BTreeSet::new();
    for w in rows.windows(2) {
        series.insert((w[0].0.clone(), w[0].1));
        if w[0].0 == "mm" && w[1].0 == "mm" && w[0].1 == w[1].1 {
            assert_eq!(w[1].2, w[0].2 + 1);
            assert!(w[1].3 >= w[0].3 - 1e-9, "{w:?}");
        }
    }
    series.insert((rows.last().unwrap().0.clone(), rows.last().unwrap().1));
    assert_eq!(series.len(), 8);
}
