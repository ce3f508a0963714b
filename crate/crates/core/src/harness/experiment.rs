//! Multi-seed experiment driver.

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;

use crate::algorithms::{
    auto_inner_length, compute_rho_orbcdvd, compute_rho_svrg, orbcd_online_step, orbcd_stochastic_step,
    orbcdvd_outer_stage, prox_gd_step, prox_online_step, prox_sgd_step, prox_svrg_outer_stage, rbcd_step, units_to_grad_evals,
    IterateState, OutputMode, Sampler, StepInfo, VrOptions,
};
use crate::error::{Error, Result};
use crate::harness::reference::solve_reference;
use crate::harness::trace::{keep_record, Trace, TraceRecord};
use crate::oracles::{BatchLoss, ProblemInstance};
use crate::schedules::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Orbcd,
    ProxSgd,
    ProxGd,
    Rbcd,
    Orbcdvd,
    ProxSvrg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Orbcd => "orbcd",
            Self::ProxSgd => "prox_sgd",
            Self::ProxGd => "prox_gd",
            Self::Rbcd => "rbcd",
            Self::Orbcdvd => "orbcdvd",
            Self::ProxSvrg => "prox_svrg",
        }
    }

    pub fn is_variance_reduced(self) -> bool {
        matches!(self, Self::Orbcdvd | Self::ProxSvrg)
    }

    /// Lipschitz constant the step-size laws refer to: block-wise for the
    /// block methods, per-mini-batch full-vector for the stochastic
    /// full-vector methods, and that of `f` for deterministic descent.
    pub fn lipschitz(self, prob: &ProblemInstance) -> f64 {
        match self {
            Self::Orbcd | Self::Rbcd | Self::Orbcdvd => prob.block_lipschitz_bounds().global,
            Self::ProxSgd | Self::ProxSvrg => prob.batch_lipschitz(),
            Self::ProxGd => prob.smooth_lipschitz(),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orbcd" => Ok(Self::Orbcd),
            "prox_sgd" => Ok(Self::ProxSgd),
            "prox_gd" => Ok(Self::ProxGd),
            "rbcd" => Ok(Self::Rbcd),
            "orbcdvd" => Ok(Self::Orbcdvd),
            "prox_svrg" => Ok(Self::ProxSvrg),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Round `t` reveals the loss of sample `(t - 1) mod m`.
    Online,
    /// Each step samples a mini-batch uniformly.
    Stochastic,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(Self::Online),
            "stochastic" => Ok(Self::Stochastic),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    ConvexSqrt,
    StronglyConvex,
    /// `eta = eta_mult * L`.
    Constant { eta_mult: f64 },
    PerBlockLipschitz,
}

impl std::str::FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" | "convex_sqrt" => Ok(Self::ConvexSqrt),
            "strongly_convex" => Ok(Self::StronglyConvex),
            "constant" => Ok(Self::Constant { eta_mult: 1.0 }),
            "per_block" | "per_block_lipschitz" => Ok(Self::PerBlockLipschitz),
            other => Err(Error::Config(format!("unknown schedule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerLength {
    /// `ceil(18 J L / gamma)`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Defaults to online for ORBCD and stochastic otherwise.
    pub mode: Option<Mode>,
    pub schedule: ScheduleSpec,
    /// Steps for the first-order solvers.
    pub rounds: u64,
    /// Outer stages for the variance-reduced solvers.
    pub stages: usize,
    pub inner: InnerLength,
    /// Constant step of the variance-reduced solvers as a multiple of `L`.
    pub eta_mult: f64,
    pub output: OutputMode,
    pub incremental_refresh: bool,
    /// Record the running average of the iterates instead of the iterate.
    pub average_iterate: bool,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub ref_tol: f64,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            mode: None,
            schedule: match algorithm {
                Algorithm::Rbcd => ScheduleSpec::PerBlockLipschitz,
                Algorithm::ProxGd => ScheduleSpec::Constant { eta_mult: 1.0 },
                _ => ScheduleSpec::ConvexSqrt,
            },
            rounds: 1000,
            stages: 10,
            inner: InnerLength::Auto,
            eta_mult: 4.0,
            output: OutputMode::Last,
            incremental_refresh: false,
            average_iterate: false,
            seeds: vec![1],
            jobs: 1,
            ref_tol: 1e-10,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(match self.algorithm {
            Algorithm::Orbcd => Mode::Online,
            _ => Mode::Stochastic,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.algorithm.is_variance_reduced() {
            if self.stages == 0 {
                return Err(Error::Config("stages must be at least 1".into()));
            }
            if self.inner == InnerLength::Fixed(0) {
                return Err(Error::Config("inner loop length m must be at least 1".into()));
            }
            if !(self.eta_mult > 0.0 && self.eta_mult.is_finite()) {
                return Err(Error::Config(format!("eta multiplier {} must be > 0", self.eta_mult)));
            }
        } else if self.rounds == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if self.mode() == Mode::Online && !matches!(self.algorithm, Algorithm::Orbcd | Algorithm::ProxSgd) {
            return Err(Error::Config(format!(
                "online mode is only defined for orbcd and prox_sgd, not {}",
                self.algorithm.name()
            )));
        }
        if self.schedule == ScheduleSpec::PerBlockLipschitz
            && matches!(self.algorithm, Algorithm::ProxSgd | Algorithm::ProxGd)
        {
            return Err(Error::Config("per-block schedule needs a block method".into()));
        }
        if !(self.ref_tol > 0.0) {
            return Err(Error::Config("reference tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// Everything a run produces besides the traces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Successful seeds, in ascending seed order.
    pub traces: Vec<Trace>,
    pub failures: Vec<(u64, String)>,
    pub x_star: Array1<f64>,
    pub f_star: f64,
    /// Constant the step sizes were scaled by.
    pub lipschitz: f64,
    /// Inner loop length of the variance-reduced solvers.
    pub inner_length: Option<usize>,
    pub eta: Option<f64>,
    pub rho_predicted: Option<f64>,
}

/// Problem the solver actually runs on: one sample per round online.
pub fn working_problem(prob: &ProblemInstance, cfg: &ExperimentConfig) -> ProblemInstance {
    match cfg.mode() {
        Mode::Online => prob.per_sample_view(),
        Mode::Stochastic => prob.clone(),
    }
}

/// Concrete step schedule for `cfg` on `work`.
pub fn build_schedule(work: &ProblemInstance, cfg: &ExperimentConfig) -> Result<StepSchedule> {
    let l = cfg.algorithm.lipschitz(work);
    let blocks = match cfg.algorithm {
        Algorithm::Orbcd | Algorithm::Rbcd => work.num_blocks(),
        _ => 1,
    };
    match cfg.schedule {
        ScheduleSpec::ConvexSqrt => StepSchedule::convex_sqrt(l),
        ScheduleSpec::StronglyConvex => {
            if work.gamma() <= 0.0 {
                return Err(Error::Config(
                    "strongly convex schedule needs a problem with gamma > 0".into(),
                ));
            }
            StepSchedule::strongly_convex(l, work.gamma(), blocks)
        }
        ScheduleSpec::Constant { eta_mult } => StepSchedule::constant(eta_mult * l),
        ScheduleSpec::PerBlockLipschitz => {
            StepSchedule::per_block_lipschitz(work.block_lipschitz_bounds().per_block)
        }
    }
}

struct VrPlan {
    eta: f64,
    m: usize,
    rho: Option<f64>,
}

fn vr_plan(work: &ProblemInstance, cfg: &ExperimentConfig) -> Result<VrPlan> {
    let l = cfg.algorithm.lipschitz(work);
    let eta = cfg.eta_mult * l;
    if !(eta > 0.0) {
        return Err(Error::Config("the Lipschitz constant is zero; set a positive step".into()));
    }
    let m = match cfg.inner {
        InnerLength::Fixed(m) => m,
        InnerLength::Auto => {
            let blocks = if cfg.algorithm == Algorithm::Orbcdvd { work.num_blocks() } else { 1 };
            auto_inner_length(blocks, l, work.gamma())
                .map_err(|e| Error::Config(format!("m = auto: {e}")))?
        }
    };
    let rho = if work.gamma() > 0.0 {
        match cfg.algorithm {
            Algorithm::Orbcdvd => compute_rho_orbcdvd(eta, m, l, work.gamma(), work.num_blocks()).ok(),
            _ => compute_rho_svrg(eta, m, l, work.gamma()).ok(),
        }
    } else {
        None
    };
    Ok(VrPlan { eta, m, rho })
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

struct Reference<'a> {
    x_star: &'a Array1<f64>,
    f_star: f64,
    /// `f_s(x_star) + g(x_star)` for every sample `s` (online mode).
    round_values: Vec<f64>,
}

fn run_first_order(
    work: &ProblemInstance,
    cfg: &ExperimentConfig,
    sched: &StepSchedule,
    reference: &Reference<'_>,
    seed: u64,
) -> Result<Trace> {
    let online = cfg.mode() == Mode::Online;
    let total = cfg.rounds;
    let blocks = work.num_blocks();
    let mut state = IterateState::zeros(work.dim());
    let mut rng = Sampler::new(seed);
    let mut units = 0u64;
    let mut regret = if online { 0.0 } else { f64::NAN };
    let mut running_sum = Array1::<f64>::zeros(work.dim());
    let mut max_grad_norm: f64 = 0.0;
    let mut trace = Trace {
        seed,
        online,
        records: Vec::new(),
        iterates: Vec::new(),
        max_grad_norm: 0.0,
    };

    let record = |trace: &mut Trace, t: u64, x: ArrayView1<'_, f64>, eta: f64, units: u64, regret: f64| -> Result<()> {
        let objective = work.objective(x)?;
        trace.records.push(TraceRecord {
            seed,
            t,
            grad_evals: units_to_grad_evals(units, blocks),
            eta,
            objective,
            subopt: objective - reference.f_star,
            regret_partial: regret,
        });
        trace.iterates.push(x.to_owned());
        Ok(())
    };
    record(&mut trace, 0, state.x.view(), f64::NAN, 0, regret)?;

    for t in 1..=total {
        let before = state.x.clone();
        if cfg.average_iterate {
            running_sum += &before;
        }
        let info: StepInfo = match (cfg.algorithm, online) {
            (Algorithm::Orbcd, true) | (Algorithm::ProxSgd, true) => {
                let round = ((t - 1) % work.num_samples() as u64) as usize;
                let loss = BatchLoss { prob: work, batch: round };
                let gap = work.loss_value(round, before.view())? + work.reg_value(before.view())?
                    - reference.round_values[round];
                regret += gap;
                max_grad_norm = max_grad_norm.max(norm(&work.batch_grad(round, before.view())?));
                if cfg.algorithm == Algorithm::Orbcd {
                    orbcd_online_step(&mut state, &loss, work, sched, &mut rng)?
                } else {
                    prox_online_step(&mut state, &loss, work, sched)?
                }
            }
            (Algorithm::Orbcd, false) => orbcd_stochastic_step(&mut state, work, sched, &mut rng)?,
            (Algorithm::ProxSgd, false) => prox_sgd_step(&mut state, work, sched, &mut rng)?,
            (Algorithm::Rbcd, _) => rbcd_step(&mut state, work, sched, &mut rng)?,
            (Algorithm::ProxGd, _) => {
                let eta = crate::schedules::step_size(sched, state.t, None)?;
                prox_gd_step(&mut state, work, eta)?
            }
            (Algorithm::Orbcdvd, _) | (Algorithm::ProxSvrg, _) => unreachable!("handled by run_vr"),
        };
        if let (false, Some(i)) = (online, info.batch) {
            max_grad_norm = max_grad_norm.max(norm(&work.batch_grad(i, before.view())?));
        }
        units += info.cost_units;
        if keep_record(t, total) {
            if info.batch.is_none() && !online {
                max_grad_norm = max_grad_norm.max(norm(&work.full_grad(before.view())?));
            }
            if cfg.average_iterate {
                let avg = &running_sum / t as f64;
                record(&mut trace, t, avg.view(), info.eta, units, regret)?;
            } else {
                record(&mut trace, t, state.x.view(), info.eta, units, regret)?;
            }
        }
    }
    trace.max_grad_norm = max_grad_norm;
    Ok(trace)
}

fn run_vr(
    work: &ProblemInstance,
    cfg: &ExperimentConfig,
    plan: &VrPlan,
    reference: &Reference<'_>,
    seed: u64,
) -> Result<Trace> {
    let blocks = work.num_blocks();
    let mut rng = Sampler::new(seed);
    let mut x = Array1::<f64>::zeros(work.dim());
    let mut units = 0u64;
    let mut trace = Trace {
        seed,
        online: false,
        records: Vec::new(),
        iterates: Vec::new(),
        max_grad_norm: 0.0,
    };
    let mut opts = VrOptions::new(plan.eta, plan.m);
    opts.output = cfg.output;
    opts.incremental_refresh = cfg.incremental_refresh;
    if cfg.output == OutputMode::BestH {
        opts.reference = Some(reference.x_star.view());
    }
    for stage in 0..=cfg.stages as u64 {
        if stage > 0 {
            let out = match cfg.algorithm {
                Algorithm::Orbcdvd => orbcdvd_outer_stage(x.view(), work, &opts, &mut rng)?,
                _ => prox_svrg_outer_stage(x.view(), work, &opts, &mut rng)?,
            };
            x = out.x;
            units += out.cost_units;
        }
        let objective = work.objective(x.view())?;
        trace.max_grad_norm = trace.max_grad_norm.max(norm(&work.full_grad(x.view())?));
        trace.records.push(TraceRecord {
            seed,
            t: stage,
            grad_evals: units_to_grad_evals(units, blocks),
            eta: if stage == 0 { f64::NAN } else { plan.eta },
            objective,
            subopt: objective - reference.f_star,
            regret_partial: f64::NAN,
        });
        trace.iterates.push(x.clone());
    }
    Ok(trace)
}

/// Run `cfg` on `prob` for every seed (in parallel when `cfg.jobs > 1`).
/// Per-seed failures are collected; the other seeds still run.
pub fn run_experiment(prob: &ProblemInstance, cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let work = working_problem(prob, cfg);
    let (x_star, f_star) = solve_reference(&work, cfg.ref_tol)?;
    let g_star = work.reg_value(x_star.view())?;
    let round_values = if cfg.mode() == Mode::Online {
        (0..work.num_batches())
            .map(|s| Ok(work.loss_value(s, x_star.view())? + g_star))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let reference = Reference {
        x_star: &x_star,
        f_star,
        round_values,
    };

    let lipschitz = cfg.algorithm.lipschitz(&work);
    let (plan, sched) = if cfg.algorithm.is_variance_reduced() {
        (Some(vr_plan(&work, cfg)?), None)
    } else {
        (None, Some(build_schedule(&work, cfg)?))
    };

    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let run_seed = |seed: u64| -> (u64, Result<Trace>) {
        let res = match (&plan, &sched) {
            (Some(plan), _) => run_vr(&work, cfg, plan, &reference, seed),
            (None, Some(sched)) => run_first_order(&work, cfg, sched, &reference, seed),
            (None, None) => unreachable!(),
        };
        (seed, res)
    };
    let results: Vec<(u64, Result<Trace>)> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
        pool.install(|| seeds.par_iter().map(|&s| run_seed(s)).collect())
    } else {
        seeds.iter().map(|&s| run_seed(s)).collect()
    };

    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (seed, res) in results {
        match res {
            Ok(trace) => traces.push(trace),
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    Ok(ExperimentOutcome {
        traces,
        failures,
        lipschitz,
        inner_length: plan.as_ref().map(|p| p.m),
        eta: plan.as_ref().map(|p| p.eta),
        rho_predicted: plan.as_ref().and_then(|p| p.rho),
        x_star,
        f_star,
    })
}
