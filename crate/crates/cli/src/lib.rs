//! Command-line front end: `gen` writes a synthetic problem, `run` executes
//! an experiment on it and writes a trace CSV, `report` fits a rate to a
//! trace CSV.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines using
//! the flag names as keys; flags given on the command line take precedence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use orbcd::algorithms::OutputMode;
use orbcd::harness::io::{read_key_values, read_problem, read_trace_csv, write_problem, write_summary, write_trace_csv};
use orbcd::harness::{
    clamp_below, empirical_bounds, fit_rate, gen_synthetic, mean_curve, run_experiment, window, Algorithm, Column,
    ExperimentConfig, InnerLength, Mode, ProblemKind, ProblemSpec, RateModel, RidgeStrength, ScheduleSpec,
};
use orbcd::{Error, LossKind};

/// Read when neither `--seeds` nor a config file gives seeds.
pub const SEEDS_ENV: &str = "ORBCD_DEFAULT_SEEDS";
const DEFAULT_SEEDS: &str = "1..20";

#[derive(Debug, Parser)]
#[command(name = "orbcd", version, about = "Randomized block coordinate descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic problem file.
    Gen(GenArgs),
    /// Run an experiment on a problem file and write a trace CSV.
    Run(RunArgs),
    /// Fit a convergence rate to a trace CSV and write `metric,value` rows.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Defaults for the other flags, as `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lasso, group_lasso, sparse_group_lasso or elastic_net.
    #[arg(long)]
    kind: ProblemKind,
    /// squared or logistic.
    #[arg(long, default_value = "squared")]
    loss: LossKind,
    /// Number of features.
    #[arg(long)]
    n: usize,
    /// Number of samples.
    #[arg(long)]
    m: usize,
    /// Number of mini-batches.
    #[arg(long = "I")]
    batches: usize,
    /// Number of blocks.
    #[arg(long = "J")]
    blocks: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Fraction of blocks that are nonzero in the ground truth.
    #[arg(long, default_value_t = 0.25)]
    sparsity: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// l1 weight of the sparse group lasso.
    #[arg(long, default_value_t = 0.05)]
    lambda2: f64,
    /// Ridge weight of the elastic net.
    #[arg(long, conflicts_with = "ridge_mult")]
    ridge: Option<f64>,
    /// Ridge weight of the elastic net as a multiple of the block Lipschitz constant.
    #[arg(long)]
    ridge_mult: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem file written by `gen`.
    #[arg(long)]
    problem: PathBuf,
    /// orbcd, prox_sgd, prox_gd, rbcd, orbcdvd or prox_svrg.
    #[arg(long)]
    algo: Algorithm,
    /// online or stochastic; online by default for orbcd only.
    #[arg(long)]
    mode: Option<Mode>,
    /// convex, strongly_convex, constant or per_block.
    #[arg(long)]
    schedule: Option<ScheduleSpec>,
    /// Steps of the first-order solvers.
    #[arg(long = "T", default_value_t = 1000)]
    rounds: u64,
    /// Outer stages of the variance-reduced solvers.
    #[arg(long, default_value_t = 10)]
    stages: usize,
    /// Inner loop length of the variance-reduced solvers, or `auto`.
    #[arg(long, default_value = "auto")]
    m: String,
    /// Constant step as a multiple of L (variance-reduced solvers and the constant schedule).
    #[arg(long)]
    eta_mult: Option<f64>,
    /// Stage output of the variance-reduced solvers: last, average or best_h.
    #[arg(long, default_value = "last")]
    output: OutputMode,
    /// Fill the cached full gradient one block at a time.
    #[arg(long)]
    incremental_refresh: bool,
    /// Record the running average of the iterates.
    #[arg(long)]
    average_iterate: bool,
    /// Seeds as `a..b` (inclusive) and/or comma-separated values.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads across seeds.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Tolerance of the reference solution.
    #[arg(long, default_value_t = 1e-10)]
    ref_tol: f64,
    /// Trace CSV; run constants go to `<out>.summary`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace CSV written by `run`.
    #[arg(long = "in")]
    input: PathBuf,
    /// power_law, log_linear or geometric.
    #[arg(long, default_value = "power_law")]
    model: RateModel,
    /// subopt, objective, regret_partial, grad_evals or eta.
    #[arg(long, default_value = "subopt")]
    column: Column,
    /// Smallest t included in the fit.
    #[arg(long)]
    t_min: Option<f64>,
    /// Largest t included in the fit.
    #[arg(long)]
    t_max: Option<f64>,
    /// Values below this are raised to it before a log-scale fit; defaults
    /// to the reference tolerance of the run.
    #[arg(long)]
    floor: Option<f64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_)
            | Error::Usage(_)
            | Error::InfeasibleParameters(_)
            | Error::InvalidStep(_)
            | Error::InvalidPartition(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

/// Entry point; `argv[0]` is the program name. Returns the exit code:
/// 0 on success, 1 on a configuration error, 2 on a runtime error.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|s| s.into().to_string_lossy().into_owned())
        .collect();
    match dispatch(argv) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(argv: Vec<String>) -> Result<(), Failure> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            return Err(Failure::config(line.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
    }
}

/// Append `--key value` for every config entry whose flag is not already
/// on the command line.
fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(path) = find_flag_value(&argv, "config") else {
        return Ok(argv);
    };
    let sub_name = argv.iter().skip(1).find(|a| !a.starts_with('-')).cloned();
    let command = Cli::command();
    let Some(sub) = sub_name.as_deref().and_then(|n| command.find_subcommand(n)) else {
        return Ok(argv);
    };
    let file = File::open(&path).map_err(|e| Failure::config(format!("cannot read config file {path}: {e}")))?;
    let entries = read_key_values(BufReader::new(file)).map_err(|e| Failure::config(format!("{path}: {e}")))?;
    let present: Vec<String> = argv
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (key, value) in entries {
        let name = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long().is_some_and(|l| l == name || l == key) && a.get_long() != Some("config"))
            .ok_or_else(|| Failure::config(format!("{path}: unknown key `{key}` for `{}`", sub.get_name())))?;
        let long = arg.get_long().unwrap().to_string();
        if present.contains(&long) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => argv.push(format!("--{long}")),
                "false" => {}
                other => return Err(Failure::config(format!("{path}: `{key}` must be true or false, got `{other}`"))),
            }
        } else {
            argv.push(format!("--{long}"));
            argv.push(value);
        }
    }
    Ok(argv)
}

fn find_flag_value(argv: &[String], name: &str) -> Option<String> {
    let flag = format!("--{name}");
    let prefix = format!("--{name}=");
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if *a == flag {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix(&prefix) {
            return Some(v.to_string());
        }
    }
    None
}

/// Parse `a..b` ranges (inclusive) and single values, comma-separated.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("invalid seed `{s}` in `{text}`"));
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty seed range `{part}`"));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(num(part)?);
        }
    }
    Ok(seeds)
}

fn create_output(path: &Path, force: bool) -> Result<BufWriter<File>, Failure> {
    let file = OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .create_new(!force)
        .open(path)
        .map_err(|e| {
            if e.kind() == io::ErrorKind::AlreadyExists {
                Failure::config(format!("{} exists; pass --force to overwrite it", path.display()))
            } else {
                Failure::from(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            }
        })?;
    Ok(BufWriter::new(file))
}

fn refuse_existing(paths: &[&Path], force: bool) -> Result<(), Failure> {
    match paths.iter().find(|p| !force && p.exists()) {
        Some(p) => Err(Failure::config(format!("{} exists; pass --force to overwrite it", p.display()))),
        None => Ok(()),
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    refuse_existing(&[&a.out], a.force)?;
    let mut spec = ProblemSpec::new(a.kind, a.n, a.m, a.batches, a.blocks);
    spec.loss = a.loss;
    spec.noise = a.noise;
    spec.sparsity = a.sparsity;
    spec.lambda = a.lambda;
    spec.lambda2 = a.lambda2;
    if let Some(r) = a.ridge {
        spec.ridge = RidgeStrength::Absolute(r);
    } else if let Some(c) = a.ridge_mult {
        spec.ridge = RidgeStrength::TimesLipschitz(c);
    }
    let prob = gen_synthetic(&spec, a.seed)?;
    let mut out = create_output(&a.out, a.force)?;
    write_problem(&prob, &mut out)?;
    out.flush()?;
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary");
    PathBuf::from(s)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let summary_file = summary_path(&a.out);
    refuse_existing(&[&a.out, &summary_file], a.force)?;

    let seeds_text = match (&a.seeds, std::env::var(SEEDS_ENV)) {
        (Some(s), _) => s.clone(),
        (None, Ok(s)) => s,
        (None, Err(_)) => DEFAULT_SEEDS.to_string(),
    };
    let mut cfg = ExperimentConfig::new(a.algo);
    cfg.seeds = parse_seeds(&seeds_text).map_err(Failure::config)?;
    cfg.mode = a.mode;
    if let Some(s) = a.schedule {
        cfg.schedule = s;
    }
    if let ScheduleSpec::Constant { .. } = cfg.schedule {
        cfg.schedule = ScheduleSpec::Constant {
            eta_mult: a.eta_mult.unwrap_or(1.0),
        };
    }
    if let Some(e) = a.eta_mult {
        cfg.eta_mult = e;
    }
    cfg.rounds = a.rounds;
    cfg.stages = a.stages;
    cfg.inner = match a.m.as_str() {
        "auto" => InnerLength::Auto,
        s => InnerLength::Fixed(
            s.parse()
                .map_err(|_| Failure::config(format!("--m must be a positive integer or `auto`, got `{s}`")))?,
        ),
    };
    cfg.output = a.output;
    cfg.incremental_refresh = a.incremental_refresh;
    cfg.average_iterate = a.average_iterate;
    cfg.jobs = a.jobs.max(1);
    cfg.ref_tol = a.ref_tol;
    cfg.validate()?;

    let prob = read_problem(open_input(&a.problem)?)?;
    let outcome = run_experiment(&prob, &cfg)?;
    for (seed, msg) in &outcome.failures {
        eprintln!("warning: seed {seed} failed: {msg}");
    }
    if outcome.traces.is_empty() {
        return Err(Failure {
            code: 2,
            message: "every seed failed".into(),
        });
    }

    let mut out = create_output(&a.out, a.force)?;
    write_trace_csv(&outcome.traces, &mut out)?;
    out.flush()?;

    let bounds = empirical_bounds(&outcome.traces, &outcome.x_star)?;
    let mut summary = BTreeMap::new();
    summary.insert("algorithm".to_string(), a.algo.name().to_string());
    summary.insert(
        "mode".to_string(),
        match cfg.mode() {
            Mode::Online => "online",
            Mode::Stochastic => "stochastic",
        }
        .to_string(),
    );
    summary.insert("lipschitz".to_string(), fmt(outcome.lipschitz));
    summary.insert("f_star".to_string(), fmt(outcome.f_star));
    summary.insert("gamma".to_string(), fmt(prob.gamma()));
    summary.insert("ref_tol".to_string(), fmt(cfg.ref_tol));
    summary.insert("num_blocks".to_string(), prob.num_blocks().to_string());
    summary.insert("seeds".to_string(), outcome.traces.len().to_string());
    summary.insert("failed_seeds".to_string(), outcome.failures.len().to_string());
    summary.insert("D_emp".to_string(), fmt(bounds.d_emp));
    summary.insert("Rf_emp".to_string(), fmt(bounds.rf_emp));
    if let Some(m) = outcome.inner_length {
        summary.insert("inner_length".to_string(), m.to_string());
    }
    if let Some(eta) = outcome.eta {
        summary.insert("eta".to_string(), fmt(eta));
    }
    if let Some(rho) = outcome.rho_predicted {
        summary.insert("rho_predicted".to_string(), fmt(rho));
    }
    let mut out = create_output(&summary_file, a.force)?;
    write_summary(&summary, &mut out)?;
    out.flush()?;
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), Failure> {
    if let Some(out) = &a.out {
        refuse_existing(&[out], a.force)?;
    }
    let traces = read_trace_csv(open_input(&a.input)?)?;
    let summary_file = summary_path(&a.input);
    let summary = if summary_file.exists() {
        read_key_values(open_input(&summary_file)?)?
    } else {
        BTreeMap::new()
    };

    let curve = mean_curve(&traces, a.column)?;
    let log_t = matches!(a.model, RateModel::PowerLaw | RateModel::LogLinear);
    let log_v = matches!(a.model, RateModel::PowerLaw | RateModel::Geometric);
    let lo = a.t_min.unwrap_or(if log_t { 1.0 } else { 0.0 });
    let mut points = window(&curve, lo, a.t_max.unwrap_or(f64::INFINITY));
    if log_v {
        let floor = match a.floor {
            Some(f) => f,
            None => summary
                .get("ref_tol")
                .and_then(|v| v.parse().ok())
                .unwrap_or(1e-10),
        };
        points = clamp_below(&points, floor);
    }
    let fit = fit_rate(&points, a.model)?;

    let mut rows = vec![
        ("slope".to_string(), fmt(fit.rate)),
        ("fit_quality".to_string(), fmt(fit.fit_quality)),
        ("points".to_string(), points.len().to_string()),
        ("seeds".to_string(), traces.len().to_string()),
    ];
    for key in ["D_emp", "Rf_emp", "rho_predicted"] {
        if let Some(v) = summary.get(key) {
            rows.push((key.to_string(), v.clone()));
        }
    }

    let mut text = String::from("metric,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    match &a.out {
        Some(path) => {
            let mut out = create_output(path, a.force)?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
