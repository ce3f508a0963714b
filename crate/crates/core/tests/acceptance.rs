//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! measured values and runtime; the process exits non-zero if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ndarray::{s, Array1};
use orbcd::algorithms::{
    compute_rho_orbcdvd, compute_rho_svrg, orbcd_stochastic_step, orbcdvd_outer_stage, prox_gd_step,
    prox_sgd_step, prox_svrg_outer_stage, vr_gradient, IterateState, Sampler, VRStageState, VrOptions,
};
use orbcd::harness::diagnostics::{
    averaged_block_lipschitz, block_cocoercivity, block_descent, gradient_distance, h_gap_sandwich,
    online_step_inequality_run, Sides, StepInequality,
};
use orbcd::harness::{
    clamp_below, fit_rate, gen_synthetic, mean_curve, regret_curve, run_experiment, solve_reference, window, Algorithm,
    Column, ExperimentConfig, ExperimentOutcome, InnerLength, Mode, ProblemKind, ProblemSpec, RateModel,
    RidgeStrength, ScheduleSpec,
};
use orbcd::{step_size, LossKind, Penalty, ProblemInstance, RegularizerSpec, StepSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| scale * rng.sample::<f64, _>(StandardNormal))
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

fn run(prob: &ProblemInstance, cfg: &ExperimentConfig) -> Result<ExperimentOutcome, String> {
    let out = run_experiment(prob, cfg).map_err(|e| e.to_string())?;
    if !out.failures.is_empty() {
        return Err(format!("seed failures: {:?}", out.failures));
    }
    Ok(out)
}

fn lasso_40() -> ProblemInstance {
    gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 40, 200, 20, 8), 11).unwrap()
}

fn elastic_net_40(ridge: RidgeStrength) -> ProblemInstance {
    let mut spec = ProblemSpec::new(ProblemKind::ElasticNet, 40, 200, 20, 8);
    spec.ridge = ridge;
    gen_synthetic(&spec, 11).unwrap()
}

fn bits(x: &Array1<f64>) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

// 1
fn prox_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_residual: f64 = 0.0;
    let mut expansions = 0;
    let kinds = ["zero", "l1", "group_l2", "sparse_group", "ridge", "elastic_net"];
    for kind in kinds {
        for _ in 0..1000 {
            let n = rng.random_range(1..=8);
            let lam = rng.random_range(0.0..3.0);
            let lam2 = rng.random_range(0.0..3.0);
            let eta = 10f64.powf(rng.random_range(-1.0..1.5));
            let penalty = match kind {
                "zero" => Penalty::Zero,
                "l1" => Penalty::L1(lam),
                "group_l2" => Penalty::GroupL2(lam),
                "sparse_group" => Penalty::SparseGroup { group: lam, l1: lam2 },
                "ridge" => Penalty::Ridge(lam),
                _ => Penalty::ElasticNet { l1: lam, ridge: lam2 },
            };
            let z1 = normal_vec(&mut rng, n, 2.0);
            let z2 = normal_vec(&mut rng, n, 2.0);
            let u1 = penalty.prox(z1.view(), eta).map_err(|e| e.to_string())?;
            let u2 = penalty.prox(z2.view(), eta).map_err(|e| e.to_string())?;
            worst_residual = worst_residual.max(penalty.optimality_residual(u1.view(), z1.view(), eta));
            // Where the prox is a translation both norms agree in exact
            // arithmetic; allow for the rounding of the two norm evaluations.
            let rounding = 4.0 * f64::EPSILON * (norm(&z1) + norm(&z2));
            if norm(&(&u1 - &u2)) > norm(&(&z1 - &z2)) + rounding {
                expansions += 1;
            }
        }
    }
    check(
        worst_residual <= 1e-8 && expansions == 0,
        format!("6 kinds x 1000: max optimality residual {worst_residual:.2e}, expansive pairs {expansions}"),
    )
}

// 2
fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        for loss in [LossKind::Squared, LossKind::Logistic] {
            let n = rng.random_range(2..=10);
            let m = rng.random_range(4..=20);
            let mut spec = ProblemSpec::new(ProblemKind::Lasso, n, m, rng.random_range(1..=m.min(4)), rng.random_range(1..=n));
            spec.loss = loss;
            let p = gen_synthetic(&spec, 1000 + k).map_err(|e| e.to_string())?;
            let x = normal_vec(&mut rng, n, 1.0);
            for i in 0..p.num_batches() {
                let mut fd = Array1::zeros(n);
                for c in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[c] += h;
                    xm[c] -= h;
                    fd[c] = (p.loss_value(i, xp.view()).unwrap() - p.loss_value(i, xm.view()).unwrap()) / (2.0 * h);
                }
                let mut g = Array1::zeros(n);
                for j in 0..p.num_blocks() {
                    let r = p.partition().range(j).unwrap();
                    g.slice_mut(s![r]).assign(&p.block_partial_grad(i, j, x.view()).unwrap());
                }
                worst = worst.max(norm(&(&g - &fd)) / norm(&g).max(1e-300));
            }
        }
    }
    check(worst < 1e-5, format!("50 instances x 2 losses: max relative error {worst:.2e}"))
}

// 3
fn smoothness_suite() -> Outcome {
    let tol = 1e-9;
    let mut report = Vec::new();
    let mut failed = false;
    let instances: Vec<(&str, ProblemSpec)> = {
        let mut v = Vec::new();
        v.push(("lasso", ProblemSpec::new(ProblemKind::Lasso, 12, 60, 6, 4)));
        let mut s = ProblemSpec::new(ProblemKind::Lasso, 12, 60, 6, 4);
        s.loss = LossKind::Logistic;
        v.push(("logistic", s));
        v.push(("group", ProblemSpec::new(ProblemKind::GroupLasso, 15, 45, 5, 5)));
        let mut s = ProblemSpec::new(ProblemKind::ElasticNet, 12, 60, 6, 4);
        s.ridge = RidgeStrength::Absolute(0.2);
        v.push(("enet", s));
        let mut s = ProblemSpec::new(ProblemKind::ElasticNet, 12, 60, 6, 3);
        s.loss = LossKind::Logistic;
        s.ridge = RidgeStrength::Absolute(0.05);
        v.push(("enet_logistic", s));
        v
    };
    for (k, (label, spec)) in instances.iter().enumerate() {
        let p = gen_synthetic(spec, 300 + k as u64).map_err(|e| e.to_string())?;
        let (x_star, f_star) = solve_reference(&p, 1e-12).map_err(|e| e.to_string())?;
        let l_block = p.block_lipschitz_bounds().global;
        let n = p.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(400 + k as u64);
        let l_full = p.batch_lipschitz();
        let mut bad = [0usize; 6];
        let mut bad_full = 0usize;
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.random_range(-2.0..0.5));
            let i = rng.random_range(0..p.num_batches());
            let j = rng.random_range(0..p.num_blocks());
            let y = &x_star + &normal_vec(&mut rng, n, scale);
            let bl = p.partition().range(j).unwrap().len();
            let h = normal_vec(&mut rng, bl, scale);
            let x = &x_star + &normal_vec(&mut rng, n, scale);
            let sides: [Option<Sides>; 4] = [
                Some(block_descent(&p, i, j, y.view(), h.view()).unwrap()),
                Some(block_cocoercivity(&p, i, j, y.view(), h.view()).unwrap()),
                Some(averaged_block_lipschitz(&p, j, y.view(), h.view()).unwrap()),
                Some(gradient_distance(&p, x.view(), x_star.view(), l_block).unwrap()),
            ];
            for (c, sd) in sides.iter().enumerate() {
                if !sd.unwrap().holds(tol) {
                    bad[c] += 1;
                }
            }
            bad_full += usize::from(!gradient_distance(&p, x.view(), x_star.view(), l_full).unwrap().holds(tol));
            if p.gamma() > 0.0 {
                let (upper, lower) = h_gap_sandwich(&p, x.view(), x_star.view(), f_star).unwrap();
                bad[4] += usize::from(!upper.holds(tol));
                bad[5] += usize::from(!lower.holds(tol));
            }
        }
        failed |= bad.iter().any(|&b| b > 0);
        report.push(format!(
            "{label}: descent {} cocoercive {} avg-lipschitz {} grad-distance {} (with full mini-batch constant {}) \
             h-upper {} h-lower {}",
            bad[0], bad[1], bad[2], bad[3], bad_full, bad[4], bad[5]
        ));
    }
    check(!failed, format!("violations per 1000 points; {}", report.join("; ")))
}

// 4
fn vr_unbiasedness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for (i_count, j_count) in [(2usize, 2usize), (4, 4), (8, 8)] {
        let p = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 2 * j_count, 8 * i_count, i_count, j_count), 5)
            .map_err(|e| e.to_string())?;
        let x_tilde = normal_vec(&mut rng, p.dim(), 1.0);
        let x = normal_vec(&mut rng, p.dim(), 1.0);
        let vr = VRStageState::new(&p, x_tilde).map_err(|e| e.to_string())?;
        let mut acc = Array1::<f64>::zeros(p.dim());
        for i in 0..i_count {
            for j in 0..j_count {
                let r = p.partition().range(j).unwrap();
                let v = vr_gradient(&p, &vr, i, j, x.view()).map_err(|e| e.to_string())?;
                let mut part = acc.slice_mut(s![r]);
                part += &v;
            }
        }
        acc /= (i_count * j_count) as f64;
        let expected = p.full_grad(x.view()).unwrap() / j_count as f64;
        worst = worst.max((&acc - &expected).iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    check(worst <= 1e-12, format!("I*J in {{4,16,64}}: max deviation {worst:.2e}"))
}

// 5
fn reductions() -> Outcome {
    let steps = 100;
    // J = 1: ORBCD stochastic against prox-SGD.
    let p = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 6, 40, 5, 1), 7).unwrap();
    let sched = StepSchedule::convex_sqrt(p.block_lipschitz_bounds().global).unwrap();
    let (mut a, mut b) = (IterateState::zeros(6), IterateState::zeros(6));
    let (mut ra, mut rb) = (Sampler::new(3), Sampler::new(3));
    let mut sgd_equal = true;
    for _ in 0..steps {
        orbcd_stochastic_step(&mut a, &p, &sched, &mut ra).unwrap();
        prox_sgd_step(&mut b, &p, &sched, &mut rb).unwrap();
        sgd_equal &= bits(&a.x) == bits(&b.x);
    }
    // I = J = 1: ORBCD stochastic against prox-GD with the same steps.
    let p1 = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 6, 40, 1, 1), 8).unwrap();
    let sched1 = StepSchedule::convex_sqrt(p1.block_lipschitz_bounds().global).unwrap();
    let (mut a, mut b) = (IterateState::zeros(6), IterateState::zeros(6));
    let mut ra = Sampler::new(4);
    let mut gd_equal = true;
    for _ in 0..steps {
        orbcd_stochastic_step(&mut a, &p1, &sched1, &mut ra).unwrap();
        let eta = step_size(&sched1, b.t, None).unwrap();
        prox_gd_step(&mut b, &p1, eta).unwrap();
        gd_equal &= bits(&a.x) == bits(&b.x);
    }
    // I = J = 1 ORBCDVD stage, and I = 1 prox-SVRG stage, against prox-GD.
    let eta = 4.0 * p1.block_lipschitz_bounds().global;
    let x0 = Array1::<f64>::zeros(6);
    let opts = VrOptions::new(eta, steps);
    let vd = orbcdvd_outer_stage(x0.view(), &p1, &opts, &mut Sampler::new(9)).unwrap();
    let mut gd = IterateState::zeros(6);
    for _ in 0..steps {
        prox_gd_step(&mut gd, &p1, eta).unwrap();
    }
    let vd_equal = bits(&vd.x) == bits(&gd.x);
    let p4 = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 8, 40, 1, 4), 9).unwrap();
    let eta4 = 10.0 * p4.batch_lipschitz();
    let svrg = prox_svrg_outer_stage(Array1::zeros(8).view(), &p4, &VrOptions::new(eta4, steps), &mut Sampler::new(1)).unwrap();
    let mut gd4 = IterateState::zeros(8);
    for _ in 0..steps {
        prox_gd_step(&mut gd4, &p4, eta4).unwrap();
    }
    let svrg_equal = bits(&svrg.x) == bits(&gd4.x);
    check(
        sgd_equal && gd_equal && vd_equal && svrg_equal,
        format!(
            "bitwise over {steps} steps: J=1 vs prox-SGD {sgd_equal}, I=J=1 vs prox-GD {gd_equal}, \
             ORBCDVD stage {vd_equal}, prox-SVRG stage {svrg_equal}"
        ),
    )
}

fn step_inequality_instance() -> (ProblemInstance, Array1<f64>, StepSchedule) {
    let base = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 20, 100, 10, 5), 606).unwrap();
    let ridge = RegularizerSpec::uniform(Penalty::Ridge(0.1), 5).unwrap();
    let work = base.with_regularizer(ridge, 0.1).unwrap().per_sample_view();
    let (x_star, _) = solve_reference(&work, 1e-12).unwrap();
    let sched = StepSchedule::convex_sqrt(work.block_lipschitz_bounds().global).unwrap();
    (work, x_star, sched)
}

// 6
fn step_inequality() -> Outcome {
    let (work, x_star, sched) = step_inequality_instance();
    let mut violations = 0;
    let mut value_form_violations = 0;
    let mut worst = f64::INFINITY;
    for seed in 1..=5 {
        let literal = online_step_inequality_run(&work, x_star.view(), &sched, 10_000, seed, StepInequality::Subgradient)
            .map_err(|e| e.to_string())?;
        for sd in &literal {
            worst = worst.min(sd.rhs - sd.lhs);
            violations += usize::from(!sd.holds(1e-9));
        }
        let value = online_step_inequality_run(&work, x_star.view(), &sched, 10_000, seed, StepInequality::FunctionValue)
            .map_err(|e| e.to_string())?;
        value_form_violations += value.iter().filter(|sd| !sd.holds(1e-9)).count();
    }
    check(
        violations == 0,
        format!(
            "5 seeds x 1e4 steps: {violations} violations (min rhs-lhs {worst:.3e}); \
             function-value form: {value_form_violations} violations"
        ),
    )
}

// 7
fn convex_regret_rate() -> Outcome {
    let p = lasso_40();
    let mut cfg = ExperimentConfig::new(Algorithm::Orbcd);
    cfg.mode = Some(Mode::Online);
    cfg.rounds = 10_000;
    cfg.seeds = seeds(20);
    cfg.jobs = jobs();
    let out = run(&p, &cfg)?;
    let curve = regret_curve(&out.traces).map_err(|e| e.to_string())?;
    let fit = fit_rate(&window(&curve, 1e3, 1e4), RateModel::PowerLaw).map_err(|e| e.to_string())?;
    check(
        fit.rate <= 0.60,
        format!("regret power-law slope on [1e3, 1e4] = {:.3} (R^2 {:.3}), threshold 0.60", fit.rate, fit.fit_quality),
    )
}

// 8
fn strongly_convex_regret_rate() -> Outcome {
    let p = elastic_net_40(RidgeStrength::Absolute(0.1));
    let mut cfg = ExperimentConfig::new(Algorithm::Orbcd);
    cfg.mode = Some(Mode::Online);
    cfg.schedule = ScheduleSpec::StronglyConvex;
    cfg.rounds = 10_000;
    cfg.seeds = seeds(20);
    cfg.jobs = jobs();
    let out = run(&p, &cfg)?;
    let curve = regret_curve(&out.traces).map_err(|e| e.to_string())?;
    let fit = fit_rate(&window(&curve, 1e2, 1e4), RateModel::LogLinear).map_err(|e| e.to_string())?;
    let at = |t: f64| curve.iter().find(|p| p.0 == t).map(|p| p.1).unwrap_or(f64::NAN);
    let ratio = (at(1e4) / 1e4f64.ln()) / (at(1e3) / 1e3f64.ln());
    check(
        fit.fit_quality >= 0.95 && (1.0 / 3.0..=3.0).contains(&ratio),
        format!(
            "regret vs log t on [1e2, 1e4]: slope {:.3}, R^2 {:.4} (>= 0.95); (R/log t) at 1e4 over 1e3 = {ratio:.3}",
            fit.rate, fit.fit_quality
        ),
    )
}

// 9
fn averaged_iterate_rates() -> Outcome {
    let mut fits = Vec::new();
    for (p, schedule) in [
        (lasso_40(), ScheduleSpec::ConvexSqrt),
        (elastic_net_40(RidgeStrength::Absolute(0.1)), ScheduleSpec::StronglyConvex),
    ] {
        let mut cfg = ExperimentConfig::new(Algorithm::Orbcd);
        cfg.mode = Some(Mode::Stochastic);
        cfg.schedule = schedule;
        cfg.average_iterate = true;
        cfg.rounds = 10_000;
        cfg.seeds = seeds(20);
        cfg.jobs = jobs();
        let out = run(&p, &cfg)?;
        let curve = clamp_below(&mean_curve(&out.traces, Column::Subopt).map_err(|e| e.to_string())?, cfg.ref_tol);
        fits.push(fit_rate(&window(&curve, 1e3, 1e4), RateModel::PowerLaw).map_err(|e| e.to_string())?);
    }
    check(
        fits[0].rate <= -0.40 && fits[1].rate <= -0.80,
        format!(
            "running-average suboptimality slope on [1e3, 1e4]: convex {:.3} (<= -0.40), strongly convex {:.3} (<= -0.80)",
            fits[0].rate, fits[1].rate
        ),
    )
}

fn stage_ratio(out: &ExperimentOutcome, floor: f64) -> Result<(f64, f64), String> {
    let curve = clamp_below(&mean_curve(&out.traces, Column::Subopt).map_err(|e| e.to_string())?, floor);
    let first = curve.first().unwrap();
    let last = curve.last().unwrap();
    let stages = last.0 - first.0;
    let worst = curve.windows(2).map(|w| w[1].1 / w[0].1).fold(0.0, f64::max);
    Ok(((last.1 / first.1).powf(1.0 / stages), worst))
}

// 10
fn orbcdvd_linear_rate() -> Outcome {
    let p = elastic_net_40(RidgeStrength::TimesLipschitz(1.0));
    let l = p.block_lipschitz_bounds().global;
    let mut cfg = ExperimentConfig::new(Algorithm::Orbcdvd);
    cfg.eta_mult = 4.0;
    cfg.inner = InnerLength::Auto;
    cfg.stages = 10;
    cfg.seeds = seeds(20);
    cfg.jobs = jobs();
    cfg.ref_tol = 1e-13;
    let out = run(&p, &cfg)?;
    let (geo, worst) = stage_ratio(&out, cfg.ref_tol)?;
    let m = out.inner_length.unwrap();
    let rho_run = out.rho_predicted.unwrap_or(f64::NAN);
    // Same formula in exact integer arithmetic with L = gamma = 1, eta = 4.
    let j = p.num_blocks() as i64;
    let (mi, e) = (m as i64, 4i64);
    let rational = ((mi + 1) + (e - 1) * j - (e - 2) + e * (e - 1) * j) as f64 / ((e - 2) * mi) as f64;
    let rho_example = compute_rho_orbcdvd(4.0 * l, 18, l, l, 1).map_err(|e| e.to_string())?;
    check(
        geo <= 0.95 && (rho_example - 32.0 / 36.0).abs() <= 1e-12 && rho_run < 1.0 && (rho_run - rational).abs() <= 1e-12,
        format!(
            "m = {m}: geometric-mean stage ratio {geo:.4} (<= 0.95, worst stage {worst:.4}); \
             rho(J=1, m=18) = {rho_example:.15}; rho(J={j}, m={m}) = {rho_run:.6}"
        ),
    )
}

// 11
fn svrg_linear_rate() -> Outcome {
    let l = lasso_40().batch_lipschitz();
    let p = elastic_net_40(RidgeStrength::Absolute(l));
    let mut cfg = ExperimentConfig::new(Algorithm::ProxSvrg);
    cfg.eta_mult = 10.0;
    cfg.inner = InnerLength::Fixed(100);
    cfg.stages = 10;
    cfg.seeds = seeds(20);
    cfg.jobs = jobs();
    cfg.ref_tol = 1e-13;
    let out = run(&p, &cfg)?;
    let (geo, worst) = stage_ratio(&out, cfg.ref_tol)?;
    let rho = out.rho_predicted.unwrap_or(f64::NAN);
    let rho_direct = compute_rho_svrg(10.0 * l, 100, l, l).map_err(|e| e.to_string())?;
    check(
        (rho - 0.84).abs() <= 1e-12 && (rho_direct - 0.84).abs() <= 1e-12 && geo <= 0.95,
        format!("rho = {rho:.15}; geometric-mean stage ratio {geo:.4} (<= 0.95, worst stage {worst:.4})"),
    )
}

// 12
fn cost_accounting() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for j in [3usize, 8] {
        let p = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 24, 60, 6, j), 12).unwrap();
        let evals = |alg: Algorithm| -> Result<Vec<f64>, String> {
            let mut cfg = ExperimentConfig::new(alg);
            cfg.mode = Some(Mode::Stochastic);
            cfg.rounds = 50;
            let out = run(&p, &cfg)?;
            Ok(out.traces[0].records.iter().map(|r| r.grad_evals).collect())
        };
        let orbcd = evals(Algorithm::Orbcd)?;
        let sgd = evals(Algorithm::ProxSgd)?;
        // Every record t <= 100 is kept, so entry t is the cost after t steps.
        ok &= orbcd.len() == 51 && sgd.len() == 51;
        ok &= (1..=50).all(|t| orbcd[t] == t as f64 / j as f64 && sgd[t] == t as f64);
        ok &= orbcd[1] / sgd[1] == 1.0 / j as f64;
        details.push(format!("J={j}: {} vs {} after one step, {} vs {} after 50", orbcd[1], sgd[1], orbcd[50], sgd[50]));
    }
    check(ok, format!("grad_evals per step, ORBCD vs prox-SGD: {}", details.join(", ")))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "prox correctness", limit: Duration::from_secs(5), run: prox_correctness },
        Criterion { id: 2, name: "gradient correctness", limit: Duration::from_secs(5), run: gradient_correctness },
        Criterion { id: 3, name: "smoothness and gradient-distance suite", limit: Duration::from_secs(30), run: smoothness_suite },
        Criterion { id: 4, name: "variance-reduced gradient unbiasedness", limit: Duration::from_secs(1), run: vr_unbiasedness },
        Criterion { id: 5, name: "reduction identities", limit: Duration::from_secs(1), run: reductions },
        Criterion { id: 6, name: "per-step online inequality", limit: Duration::from_secs(10), run: step_inequality },
        Criterion { id: 7, name: "convex regret rate", limit: Duration::from_secs(120), run: convex_regret_rate },
        Criterion { id: 8, name: "strongly convex regret rate", limit: Duration::from_secs(120), run: strongly_convex_regret_rate },
        Criterion { id: 9, name: "averaged-iterate iteration complexity", limit: Duration::from_secs(120), run: averaged_iterate_rates },
        Criterion { id: 10, name: "ORBCDVD linear rate", limit: Duration::from_secs(120), run: orbcdvd_linear_rate },
        Criterion { id: 11, name: "prox-SVRG linear rate", limit: Duration::from_secs(120), run: svrg_linear_rate },
        Criterion { id: 12, name: "cost accounting", limit: Duration::from_secs(1), run: cost_accounting },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; runtime over the {:?} limit", c.limit)),
            Err(d) => (false, d),
        };
        failures += usize::from(!pass);
        println!(
            "{} [{:>2}] {} ({:.2}s): {}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
