//! Versioned JSON documents and CSV tables.
//!
//! Non-finite numbers are written as JSON `null`. Component indices in every
//! user-facing name and column are 1-based; node ids are 0-based.

use std::io::Write;

use blockmix_core::bootstrap::{BootstrapConfig, BootstrapResult, BootstrapTarget};
use blockmix_core::engine::{Diagnostic, EStepStrategy, FitConfig, FitResult, Membership};
use blockmix_core::model::{BlockTable, DyadModel, ExpFamBlockModel, FamilyKind, NewtonOptions, TabularBlockModel};
use blockmix_core::{DyadAlphabet, EdgeAlphabet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "blockmix.model/1";
pub const FIT_SCHEMA: &str = "blockmix.fit/1";
pub const BOOTSTRAP_SCHEMA: &str = "blockmix.bootstrap/1";

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn finite_vec(xs: &[f64]) -> Vec<Option<f64>> {
    xs.iter().map(|&x| finite(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphabetDoc {
    pub directed: bool,
    pub values: Vec<i32>,
    pub zero_label: i32,
}

impl AlphabetDoc {
    pub fn from_alphabet(a: &DyadAlphabet) -> Self {
        let e = a.edge_alphabet();
        Self { directed: a.is_directed(), values: e.values().to_vec(), zero_label: e.zero_label() }
    }

    pub fn to_alphabet(&self) -> Result<DyadAlphabet> {
        let edge = EdgeAlphabet::new(self.values.clone(), self.zero_label)?;
        Ok(DyadAlphabet::new(edge, self.directed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamsDoc {
    /// `pi[k][l][d]` over the dyads listed in `dyads`, each as `[y_ij, y_ji]`
    /// (a single label when undirected).
    Tabular { dyads: Vec<Vec<i32>>, pi: Vec<Vec<Vec<f64>>> },
    P1 { names: Vec<String>, theta: Vec<f64>, fixed: Vec<bool> },
    ExcessTrust { names: Vec<String>, theta: Vec<f64>, fixed: Vec<bool> },
}

/// Mixing weights plus dyad model: everything needed to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub schema: String,
    pub k: usize,
    pub alphabet: AlphabetDoc,
    pub gamma: Vec<f64>,
    pub params: ParamsDoc,
    /// Node count of the data the model was fitted to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

fn dyad_labels(a: &DyadAlphabet) -> Vec<Vec<i32>> {
    a.iter()
        .map(|d| {
            let (x, y) = a.labels(d);
            if a.is_directed() {
                vec![x, y]
            } else {
                vec![x]
            }
        })
        .collect()
}

impl ModelDoc {
    pub fn new(gamma: &[f64], model: &DyadModel, n: Option<usize>) -> Result<Self> {
        let a = model.alphabet();
        let k = model.components();
        let params = match model {
            DyadModel::Tabular(m) => ParamsDoc::Tabular {
                dyads: dyad_labels(a),
                pi: (0..k).map(|x| (0..k).map(|y| m.table().block(x, y).to_vec()).collect()).collect(),
            },
            DyadModel::ExpFam(m) => {
                let (names, theta, fixed) = (m.names().to_vec(), m.theta().to_vec(), m.fixed_mask().to_vec());
                match m.kind() {
                    FamilyKind::P1 => ParamsDoc::P1 { names, theta, fixed },
                    FamilyKind::ExcessTrust => ParamsDoc::ExcessTrust { names, theta, fixed },
                    other => {
                        return Err(Error::Data(format!("{} models have no file format", other.as_str())));
                    }
                }
            }
        };
        Ok(Self {
            schema: MODEL_SCHEMA.into(),
            k,
            alphabet: AlphabetDoc::from_alphabet(a),
            gamma: gamma.to_vec(),
            params,
            n,
        })
    }

    pub fn to_model(&self) -> Result<(Vec<f64>, DyadModel)> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::Data(format!("expected schema {MODEL_SCHEMA}, found {:?}", self.schema)));
        }
        let a = self.alphabet.to_alphabet()?;
        let k = self.k;
        if self.gamma.len() != k {
            return Err(Error::Data(format!("{} mixing weights for k={k}", self.gamma.len())));
        }
        let model = match &self.params {
            ParamsDoc::Tabular { dyads, pi } => {
                if *dyads != dyad_labels(&a) {
                    return Err(Error::Data("dyad list does not match the alphabet".into()));
                }
                let size = a.size();
                let mut data = Vec::with_capacity(k * k * size);
                if pi.len() != k || pi.iter().any(|row| row.len() != k || row.iter().any(|b| b.len() != size)) {
                    return Err(Error::Data(format!("pi must be {k}x{k}x{size}")));
                }
                for row in pi {
                    for block in row {
                        data.extend_from_slice(block);
                    }
                }
                DyadModel::Tabular(TabularBlockModel::new(a, BlockTable::from_vec(k, size, data)?)?)
            }
            ParamsDoc::P1 { names, theta, fixed } => {
                DyadModel::ExpFam(family(ExpFamBlockModel::p1_mixture(k, a)?, names, theta, fixed)?)
            }
            ParamsDoc::ExcessTrust { names, theta, fixed } => {
                let m = ExpFamBlockModel::excess_trust(k)?;
                if *m.alphabet() != a {
                    return Err(Error::Data("excess-trust models use the signed directed alphabet".into()));
                }
                DyadModel::ExpFam(family(m, names, theta, fixed)?)
            }
        };
        Ok((self.gamma.clone(), model))
    }
}

fn family(mut m: ExpFamBlockModel, names: &[String], theta: &[f64], fixed: &[bool]) -> Result<ExpFamBlockModel> {
    if names != m.names() {
        return Err(Error::Data(format!("parameter names {names:?} do not match {:?}", m.names())));
    }
    m.set_fixed_mask(fixed.to_vec())?;
    m.set_theta(theta)?;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EStepDoc {
    Mm,
    Fp,
}

impl From<EStepStrategy> for EStepDoc {
    fn from(s: EStepStrategy) -> Self {
        match s {
            EStepStrategy::Mm => EStepDoc::Mm,
            EStepStrategy::Fp => EStepDoc::Fp,
        }
    }
}

impl From<EStepDoc> for EStepStrategy {
    fn from(s: EStepDoc) -> Self {
        match s {
            EStepDoc::Mm => EStepStrategy::Mm,
            EStepDoc::Fp => EStepStrategy::Fp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfigDoc {
    pub e_step: EStepDoc,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub alpha_floor: f64,
    pub newton_max_iters: usize,
    pub newton_grad_tol: f64,
}

impl From<&FitConfig> for FitConfigDoc {
    fn from(c: &FitConfig) -> Self {
        Self {
            e_step: c.e_step.into(),
            restarts: c.restarts,
            max_sweeps: c.max_sweeps,
            rel_tol: c.rel_tol,
            seed: c.seed,
            alpha_floor: c.alpha_floor,
            newton_max_iters: c.newton.max_iters,
            newton_grad_tol: c.newton.grad_tol,
        }
    }
}

impl From<&FitConfigDoc> for FitConfig {
    fn from(c: &FitConfigDoc) -> Self {
        FitConfig {
            max_sweeps: c.max_sweeps,
            rel_tol: c.rel_tol,
            restarts: c.restarts,
            e_step: c.e_step.into(),
            newton: NewtonOptions { max_iters: c.newton_max_iters, grad_tol: c.newton_grad_tol },
            seed: c.seed,
            alpha_floor: c.alpha_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticDoc {
    pub kind: String,
    pub detail: String,
    pub first_sweep: usize,
    pub last_sweep: usize,
    pub count: usize,
}

impl From<&Diagnostic> for DiagnosticDoc {
    fn from(d: &Diagnostic) -> Self {
        Self {
            kind: d.kind.into(),
            detail: d.detail.clone(),
            first_sweep: d.first_sweep,
            last_sweep: d.last_sweep,
            count: d.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDoc {
    pub schema: String,
    pub n: usize,
    pub model: ModelDoc,
    pub lb: Option<f64>,
    pub initial_lb: Option<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
    pub restart_index: usize,
    pub restart_lbs: Vec<Option<f64>>,
    pub lb_trace: Vec<Option<f64>>,
    pub e_step_trace: Vec<Option<f64>>,
    pub diagnostics: Vec<DiagnosticDoc>,
    pub config: FitConfigDoc,
}

impl FitDoc {
    pub fn new(fit: &FitResult, config: &FitConfig) -> Result<Self> {
        let n = fit.state.alpha.n();
        Ok(Self {
            schema: FIT_SCHEMA.into(),
            n,
            model: ModelDoc::new(&fit.state.gamma, &fit.state.model, Some(n))?,
            lb: finite(fit.lb),
            initial_lb: finite(fit.initial_lb),
            converged: fit.converged,
            sweeps_used: fit.sweeps_used,
            restart_index: fit.restart_index,
            restart_lbs: finite_vec(&fit.restart_lbs),
            lb_trace: finite_vec(&fit.lb_trace),
            e_step_trace: finite_vec(&fit.e_step_trace),
            diagnostics: fit.diagnostics.iter().map(DiagnosticDoc::from).collect(),
            config: config.into(),
        })
    }

    pub fn target(&self) -> Result<BootstrapTarget> {
        if self.schema != FIT_SCHEMA {
            return Err(Error::Data(format!("expected schema {FIT_SCHEMA}, found {:?}", self.schema)));
        }
        let (gamma, model) = self.model.to_model()?;
        Ok(BootstrapTarget { n: self.n, gamma, model })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfigDoc {
    pub replicates: usize,
    pub refit_max_sweeps: usize,
    pub anchor_epsilon: f64,
    pub ci_levels: (f64, f64),
    pub seed: u64,
    pub relabel: bool,
}

impl From<&BootstrapConfig> for BootstrapConfigDoc {
    fn from(c: &BootstrapConfig) -> Self {
        Self {
            replicates: c.replicates,
            refit_max_sweeps: c.refit_max_sweeps,
            anchor_epsilon: c.anchor_epsilon,
            ci_levels: c.ci_levels,
            seed: c.seed,
            relabel: c.relabel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDoc {
    pub schema: String,
    pub replicates: usize,
    pub succeeded: usize,
    pub failures: Vec<usize>,
    /// More than 20% of replicates failed.
    pub warning: bool,
    pub parameters: Vec<ParameterSummary>,
    pub config: BootstrapConfigDoc,
    pub fit_config: FitConfigDoc,
}

impl BootstrapDoc {
    pub fn new(result: &BootstrapResult, config: &BootstrapConfig, fit_config: &FitConfig) -> Self {
        let parameters = result
            .names
            .iter()
            .enumerate()
            .map(|(c, name)| ParameterSummary {
                name: name.clone(),
                estimate: finite(result.estimate[c]),
                lower: result.intervals.get(c).and_then(|i| finite(i.lower)),
                upper: result.intervals.get(c).and_then(|i| finite(i.upper)),
                std_error: result.std_errors.get(c).and_then(|&s| finite(s)),
            })
            .collect();
        Self {
            schema: BOOTSTRAP_SCHEMA.into(),
            replicates: result.replicates.len(),
            succeeded: result.replicates.len() - result.failures.len(),
            failures: result.failures.clone(),
            warning: result.warning,
            parameters,
            config: config.into(),
            fit_config: fit_config.into(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("documents serialize");
    out.push(b'\n');
    out
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// `node_id, alpha_1..alpha_K, hard_assignment` with 1-based assignments.
pub fn write_membership<W: Write>(alpha: &Membership, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = alpha.k();
    let mut header = vec!["node_id".to_string()];
    header.extend((1..=k).map(|c| format!("alpha_{c}")));
    header.push("hard_assignment".into());
    w.write_record(&header).map_err(csv_error)?;
    for (i, z) in alpha.hard_assignment().into_iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(alpha.row(i).iter().map(|&x| float(x)));
        row.push((z + 1).to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()
}

/// `node_id, block` with 1-based blocks.
pub fn write_truth<W: Write>(assignment: &[usize], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_id", "block"]).map_err(csv_error)?;
    for (i, z) in assignment.iter().enumerate() {
        w.write_record([i.to_string(), (z + 1).to_string()]).map_err(csv_error)?;
    }
    w.flush()
}

/// One row per replicate: bookkeeping columns, then one column per parameter.
pub fn write_samples<W: Write>(result: &BootstrapResult, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["replicate", "seed", "lb", "sweeps_used", "converged", "failed"].map(String::from).to_vec();
    header.extend(result.names.iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for r in &result.replicates {
        let mut row = vec![
            r.index.to_string(),
            r.seed.to_string(),
            float(r.lb),
            r.sweeps_used.to_string(),
            r.converged.to_string(),
            r.failed().to_string(),
        ];
        row.extend(r.parameters.iter().map(|&x| float(x)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()
}

/// A lower-bound trace for the `strategy, run, sweep, lb` table.
pub struct TraceSeries<'a> {
    pub strategy: &'a str,
    pub run: usize,
    pub lb: &'a [f64],
}

pub fn write_traces<W: Write>(series: &[TraceSeries<'_>], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "run", "sweep", "lb"]).map_err(csv_error)?;
    for s in series {
        for (t, &lb) in s.lb.iter().enumerate() {
            w.write_record([s.strategy.to_string(), s.run.to_string(), (t + 1).to_string(), float(lb)])
                .map_err(csv_error)?;
        }
    }
    w.flush()
}
