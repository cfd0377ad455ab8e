//! `blockmix fit | simulate | bootstrap | compare`.
//!
//! Exit statuses: 0 success, 2 fit stopped at its sweep limit, 64 usage
//! error, 65 malformed data, 66 unreadable input, 73 output not writable.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use blockmix_core::bootstrap::BootstrapConfig;
use blockmix_core::engine::{EStepStrategy, FitConfig};
use blockmix_core::model::{DyadModel, ExpFamBlockModel, NewtonOptions, TabularBlockModel};
use blockmix_core::simulate::{sample_network, SimSpec};
use blockmix_core::{EdgeAlphabet, SparseNetwork};
use clap::{Args, Parser, Subcommand};

use crate::config::Resolver;
use crate::edgelist::{read_edge_list, write_edge_list};
use crate::error::{exit, Error, Result};
use crate::formats::{
    self, to_json, BootstrapDoc, FitDoc, ModelDoc, TraceSeries, FIT_SCHEMA, MODEL_SCHEMA,
};
use crate::manifest::{InputDigest, Manifest};
use crate::{io, parallel};

pub const FIT_FILE: &str = "fit.json";
pub const MEMBERSHIP_FILE: &str = "membership.csv";
pub const NETWORK_FILE: &str = "network.tsv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const BOOTSTRAP_FILE: &str = "bootstrap.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const TRACES_FILE: &str = "traces.csv";

macro_rules! word_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

word_enum!(ModelKind { Tabular => "tabular", P1 => "p1", ExcessTrust => "excess-trust" });
word_enum!(EStepArg { Mm => "mm", Fp => "fp" });
word_enum!(AlphabetKind { Binary => "binary", Signed => "signed" });

impl From<EStepArg> for EStepStrategy {
    fn from(e: EStepArg) -> Self {
        match e {
            EStepArg::Mm => EStepStrategy::Mm,
            EStepArg::Fp => EStepStrategy::Fp,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "blockmix", version, about = "Finite-mixture block models for large discrete-valued networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a block model to an edge list.
    Fit(FitArgs),
    /// Simulate a network from model parameters.
    Simulate(SimulateArgs),
    /// Parametric bootstrap around a fit.
    Bootstrap(BootstrapArgs),
    /// Lower-bound traces of the MM and fixed-point E-steps from matched starts.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "BLOCKMIX_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Edge list (`i<TAB>j<TAB>value` rows).
    #[arg(long)]
    input: Option<String>,
    /// tabular, p1 or excess-trust.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Number of components.
    #[arg(long = "K", short = 'K', alias = "k")]
    k: Option<usize>,
    /// Edge values: binary {0,1} or signed {-1,0,1}. Defaults to signed for excess-trust.
    #[arg(long)]
    alphabet: Option<AlphabetKind>,
    /// Treat the network as directed; overrides the file's #directed= header.
    #[arg(long)]
    directed: Option<bool>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    alpha_floor: Option<f64>,
    #[arg(long)]
    newton_max_iters: Option<usize>,
    #[arg(long)]
    newton_grad_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// mm or fp.
    #[arg(long)]
    e_step: Option<EStepArg>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_sweeps: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Model JSON, or a fit JSON whose model is used.
    #[arg(long)]
    params: Option<String>,
    /// Node count; defaults to that of the fit.
    #[arg(long)]
    n: Option<usize>,
    /// Shuffle node ids after sampling so block structure is not visible in node order.
    #[arg(long)]
    relabel: Option<bool>,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[command(flatten)]
    common: Common,
    /// Fit JSON written by `blockmix fit`.
    #[arg(long)]
    fit: Option<String>,
    /// Number of replicates.
    #[arg(long = "B", short = 'B', alias = "b")]
    replicates: Option<usize>,
    #[arg(long)]
    refit_max_sweeps: Option<usize>,
    #[arg(long)]
    anchor_epsilon: Option<f64>,
    #[arg(long)]
    ci_lower: Option<f64>,
    #[arg(long)]
    ci_upper: Option<f64>,
    #[arg(long)]
    relabel: Option<bool>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    runs: Option<usize>,
    /// Sweep limit shared by both strategies.
    #[arg(long)]
    budget_sweeps: Option<usize>,
}

/// Runs the command line and returns the exit status.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("blockmix: {e}");
            e.exit_code()
        }
    }
}

struct Run {
    started: Instant,
    manifest: Manifest,
    out: PathBuf,
}

impl Run {
    fn new(command: &str, seed: u64, out: &str, config: std::collections::BTreeMap<String, String>) -> Self {
        Self { started: Instant::now(), manifest: Manifest::new(command, seed, config), out: PathBuf::from(out) }
    }

    fn input(&mut self, role: &str, path: &str, bytes: &[u8]) {
        self.manifest.inputs.push(InputDigest { role: role.into(), path: path.into(), sha256: io::sha256_hex(bytes) });
    }

    /// Writes every output, then the manifest.
    fn finish(mut self, outputs: Vec<(&str, Vec<u8>)>, status: u8) -> Result<u8> {
        io::create_dir(&self.out)?;
        for (name, bytes) in &outputs {
            io::write_bytes(&self.out.join(name), bytes)?;
            self.manifest.outputs.push((*name).into());
        }
        self.manifest.exit_status = status;
        self.manifest.wall_time_seconds = self.started.elapsed().as_secs_f64();
        self.manifest.write(&self.out)?;
        Ok(status)
    }
}

fn buffer(fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut out = Vec::new();
    fill(&mut out).expect("writing to memory");
    out
}

struct Data {
    network: SparseNetwork,
    template: DyadModel,
    fit: FitConfig,
    input: String,
    bytes: Vec<u8>,
}

fn resolve_data(r: &mut Resolver, d: DataArgs, seed: u64) -> Result<Data> {
    let input: String = r.required("input", d.input)?;
    let model = r.get("model", d.model, ModelKind::Tabular)?;
    let k: usize = r.required("K", d.k)?;
    let default_alphabet = if model == ModelKind::ExcessTrust { AlphabetKind::Signed } else { AlphabetKind::Binary };
    let alphabet = r.get("alphabet", d.alphabet, default_alphabet)?;
    let directed: Option<bool> = r.optional("directed", d.directed)?;
    let fit = FitConfig {
        rel_tol: r.get("rel-tol", d.rel_tol, 1e-10)?,
        alpha_floor: r.get("alpha-floor", d.alpha_floor, 1e-12)?,
        newton: NewtonOptions {
            max_iters: r.get("newton-max-iters", d.newton_max_iters, 100)?,
            grad_tol: r.get("newton-grad-tol", d.newton_grad_tol, 1e-10)?,
        },
        seed,
        ..FitConfig::default()
    };
    if k == 0 {
        return Err(Error::Usage("--K must be at least 1".into()));
    }

    let bytes = io::read(Path::new(&input))?;
    let edge = match alphabet {
        AlphabetKind::Binary => EdgeAlphabet::binary(),
        AlphabetKind::Signed => EdgeAlphabet::signed(),
    };
    let network = read_edge_list(&bytes[..], &input, &edge, directed)?;
    let a = network.alphabet().clone();
    let template = match model {
        ModelKind::Tabular => DyadModel::Tabular(TabularBlockModel::uniform(k, a)),
        ModelKind::P1 => DyadModel::ExpFam(ExpFamBlockModel::p1_mixture(k, a).map_err(usage_for_model)?),
        ModelKind::ExcessTrust => {
            let m = ExpFamBlockModel::excess_trust(k)?;
            if *m.alphabet() != a {
                return Err(Error::Usage("excess-trust needs --alphabet signed and a directed network".into()));
            }
            DyadModel::ExpFam(m)
        }
    };
    if k > network.n() {
        return Err(Error::Data(format!("{input}: K={k} exceeds the {} nodes", network.n())));
    }
    Ok(Data { network, template, fit, input, bytes })
}

fn usage_for_model(e: blockmix_core::Error) -> Error {
    match e {
        blockmix_core::Error::UnsupportedAlphabet { .. } => Error::Usage(e.to_string()),
        other => other.into(),
    }
}

fn cmd_fit(a: FitArgs) -> Result<u8> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let out: String = r.required("out", a.common.out)?;
    let seed = r.get("seed", a.common.seed, 0u64)?;
    let jobs = r.get("jobs", a.common.jobs, 0usize)?;
    let mut data = resolve_data(&mut r, a.data, seed)?;
    data.fit.e_step = r.get("e-step", a.e_step, EStepArg::Mm)?.into();
    data.fit.restarts = r.get("restarts", a.restarts, 10usize)?;
    data.fit.max_sweeps = r.get("max-sweeps", a.max_sweeps, FitConfig::default().max_sweeps)?;
    let config = r.finish()?;
    if data.fit.restarts == 0 {
        return Err(Error::Usage("--restarts must be at least 1".into()));
    }

    let mut run = Run::new("fit", seed, &out, config);
    run.input("input", &data.input, &data.bytes);
    let pool = parallel::pool(jobs)?;
    let fit = parallel::fit(&pool, &data.network, &data.template, &data.fit)?;
    eprintln!(
        "fit: lb {} after {} sweeps (restart {} of {}){}",
        fit.lb,
        fit.sweeps_used,
        fit.restart_index + 1,
        data.fit.restarts,
        if fit.converged { "" } else { ", sweep limit reached" }
    );
    for d in &fit.diagnostics {
        eprintln!("fit: {} {} (sweeps {}..{}, {}x)", d.kind, d.detail, d.first_sweep, d.last_sweep, d.count);
    }
    let doc = FitDoc::new(&fit, &data.fit)?;
    let membership = buffer(|w| formats::write_membership(&fit.state.alpha, w));
    let status = if fit.converged { exit::OK } else { exit::MAX_SWEEPS };
    run.finish(vec![(FIT_FILE, to_json(&doc)), (MEMBERSHIP_FILE, membership)], status)
}

fn read_json(path: &str) -> Result<(Vec<u8>, serde_json::Value)> {
    let bytes = io::read(Path::new(path))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| Error::data(path, e))?;
    Ok((bytes, value))
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let out: String = r.required("out", a.common.out)?;
    let params: String = r.required("params", a.params)?;
    let seed = r.get("seed", a.common.seed, 0u64)?;
    let relabel = r.get("relabel", a.relabel, true)?;
    let n_flag: Option<usize> = r.optional("n", a.n)?;
    // Accepted for uniformity; sampling is sequential.
    let _jobs = r.get("jobs", a.common.jobs, 0usize)?;

    let (bytes, value) = read_json(&params)?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or_default().to_string();
    let doc: ModelDoc = match schema.as_str() {
        MODEL_SCHEMA => serde_json::from_value(value).map_err(|e| Error::data(&params, e))?,
        FIT_SCHEMA => {
            let fit: FitDoc = serde_json::from_value(value).map_err(|e| Error::data(&params, e))?;
            fit.model
        }
        other => return Err(Error::Data(format!("{params}: unsupported schema {other:?}"))),
    };
    let n = match n_flag.or(doc.n) {
        Some(n) => n,
        None => return Err(Error::Usage("--n is required when the parameters carry no node count".into())),
    };
    if n_flag.is_none() {
        r.optional("n", Some(n))?;
    }
    let config = r.finish()?;
    let (gamma, model) = doc.to_model()?;

    let mut run = Run::new("simulate", seed, &out, config);
    run.input("params", &params, &bytes);
    let sim = sample_network(&SimSpec { n, gamma, model, seed, relabel })?;
    eprintln!("simulate: {} nodes, {} nonbaseline dyads", n, sim.network.nonbaseline_count());
    let network = buffer(|w| write_edge_list(&sim.network, w));
    let truth = buffer(|w| formats::write_truth(&sim.assignment, w));
    run.finish(vec![(NETWORK_FILE, network), (TRUTH_FILE, truth)], exit::OK)
}

fn cmd_bootstrap(a: BootstrapArgs) -> Result<u8> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let out: String = r.required("out", a.common.out)?;
    let fit_path: String = r.required("fit", a.fit)?;
    let seed = r.get("seed", a.common.seed, 0u64)?;
    let jobs = r.get("jobs", a.common.jobs, 0usize)?;
    let defaults = BootstrapConfig::default();
    let config = BootstrapConfig {
        replicates: r.get("B", a.replicates, defaults.replicates)?,
        refit_max_sweeps: r.get("refit-max-sweeps", a.refit_max_sweeps, defaults.refit_max_sweeps)?,
        anchor_epsilon: r.get("anchor-epsilon", a.anchor_epsilon, defaults.anchor_epsilon)?,
        ci_levels: (
            r.get("ci-lower", a.ci_lower, defaults.ci_levels.0)?,
            r.get("ci-upper", a.ci_upper, defaults.ci_levels.1)?,
        ),
        seed,
        relabel: r.get("relabel", a.relabel, defaults.relabel)?,
    };
    let (lo, hi) = config.ci_levels;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::Usage(format!("interval levels ({lo}, {hi}) must satisfy 0 <= lower <= upper <= 1")));
    }
    let resolved = r.finish()?;

    let (bytes, value) = read_json(&fit_path)?;
    let doc: FitDoc = serde_json::from_value(value).map_err(|e| Error::data(&fit_path, e))?;
    let target = doc.target()?;
    let fit_config = FitConfig::from(&doc.config);

    let mut run = Run::new("bootstrap", seed, &out, resolved);
    run.input("fit", &fit_path, &bytes);
    let pool = parallel::pool(jobs)?;
    let result = parallel::bootstrap(&pool, &target, &fit_config, &config)?;
    eprintln!(
        "bootstrap: {} replicates, {} failed{}",
        result.replicates.len(),
        result.failures.len(),
        if result.warning { " (more than 20%; intervals are unreliable)" } else { "" }
    );
    let summary = BootstrapDoc::new(&result, &config, &fit_config);
    let samples = buffer(|w| formats::write_samples(&result, w));
    run.finish(vec![(BOOTSTRAP_FILE, to_json(&summary)), (SAMPLES_FILE, samples)], exit::OK)
}

fn cmd_compare(a: CompareArgs) -> Result<u8> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let out: String = r.required("out", a.common.out)?;
    let seed = r.get("seed", a.common.seed, 0u64)?;
    let jobs = r.get("jobs", a.common.jobs, 0usize)?;
    let mut data = resolve_data(&mut r, a.data, seed)?;
    let runs = r.get("runs", a.runs, 20usize)?;
    data.fit.max_sweeps = r.get("budget-sweeps", a.budget_sweeps, 100usize)?;
    let config = r.finish()?;

    let mut run = Run::new("compare", seed, &out, config);
    run.input("input", &data.input, &data.bytes);
    let pool = parallel::pool(jobs)?;
    let strategies = [EStepStrategy::Mm, EStepStrategy::Fp];
    let results = parallel::compare(&pool, &data.network, &data.template, &data.fit, &strategies, runs)?;
    let names = ["mm", "fp"];
    let mut series = Vec::new();
    for (s, fits) in results.iter().enumerate() {
        let best = fits.iter().map(|f| f.lb).fold(f64::NEG_INFINITY, f64::max);
        let falls = fits.iter().filter(|f| f.lb_trace.windows(2).any(|w| w[1] < w[0] - 1e-9)).count();
        eprintln!("compare: {} best lb {best}, {falls} of {runs} traces decrease somewhere", names[s]);
        for f in fits {
            series.push(TraceSeries { strategy: names[s], run: f.restart_index, lb: &f.lb_trace });
        }
    }
    let traces = buffer(|w| formats::write_traces(&series, w));
    run.finish(vec![(TRACES_FILE, traces)], exit::OK)
}
