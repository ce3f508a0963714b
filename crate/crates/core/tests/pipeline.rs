use std::io::BufReader;

use orbcd::harness::io::{read_problem, read_trace_csv, write_problem, write_trace_csv};
use orbcd::harness::{
    gen_synthetic, regret_curve, run_experiment, solve_reference, Algorithm, ExperimentConfig, InnerLength, Mode,
    ProblemKind, ProblemSpec, RidgeStrength,
};
use orbcd::LossKind;

fn roundtrip(spec: &ProblemSpec) -> (Vec<u8>, Vec<u8>) {
    let p = gen_synthetic(spec, 21).unwrap();
    let mut first = Vec::new();
    write_problem(&p, &mut first).unwrap();
    let q = read_problem(BufReader::new(first.as_slice())).unwrap();
    let mut second = Vec::new();
    write_problem(&q, &mut second).unwrap();
    (first, second)
}

#[test]
fn problem_files_round_trip_for_every_kind() {
    for kind in [
        ProblemKind::Lasso,
        ProblemKind::GroupLasso,
        ProblemKind::SparseGroupLasso,
        ProblemKind::ElasticNet,
    ] {
        for loss in [LossKind::Squared, LossKind::Logistic] {
            let mut spec = ProblemSpec::new(kind, 9, 31, 4, 3);
            spec.loss = loss;
            let (a, b) = roundtrip(&spec);
            assert_eq!(a, b, "{kind:?} {loss:?}");
        }
    }
}

#[test]
fn reloaded_problem_gives_identical_traces() {
    let p = gen_synthetic(&ProblemSpec::new(ProblemKind::SparseGroupLasso, 16, 64, 8, 4), 3).unwrap();
    let mut buf = Vec::new();
    write_problem(&p, &mut buf).unwrap();
    let q = read_problem(BufReader::new(buf.as_slice())).unwrap();

    let mut cfg = ExperimentConfig::new(Algorithm::Orbcd);
    cfg.mode = Some(Mode::Stochastic);
    cfg.rounds = 2_000;
    cfg.seeds = vec![3, 1, 2];
    let csv = |prob| {
        let out = run_experiment(prob, &cfg).unwrap();
        let mut bytes = Vec::new();
        write_trace_csv(&out.traces, &mut bytes).unwrap();
        bytes
    };
    let a = csv(&p);
    assert_eq!(a, csv(&q));

    let traces = read_trace_csv(a.as_slice()).unwrap();
    assert_eq!(traces.iter().map(|t| t.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
    for t in &traces {
        assert_eq!(t.last().unwrap().t, 2_000);
        assert!(t.records.windows(2).all(|w| w[0].grad_evals <= w[1].grad_evals));
    }
}

#[test]
fn every_algorithm_reduces_the_objective() {
    let mut spec = ProblemSpec::new(ProblemKind::ElasticNet, 20, 100, 10, 4);
    spec.ridge = RidgeStrength::TimesLipschitz(0.2);
    let p = gen_synthetic(&spec, 4).unwrap();
    let (_, f_star) = solve_reference(&p, 1e-10).unwrap();
    for alg in [
        Algorithm::Orbcd,
        Algorithm::ProxSgd,
        Algorithm::ProxGd,
        Algorithm::Rbcd,
        Algorithm::Orbcdvd,
        Algorithm::ProxSvrg,
    ] {
        let mut cfg = ExperimentConfig::new(alg);
        cfg.rounds = 3_000;
        cfg.stages = 5;
        cfg.seeds = vec![1, 2];
        if alg == Algorithm::ProxSvrg {
            cfg.eta_mult = 10.0;
            cfg.inner = InnerLength::Fixed(100);
        }
        let out = run_experiment(&p, &cfg).unwrap();
        assert!(out.failures.is_empty(), "{alg:?}");
        for t in &out.traces {
            let first = t.records.first().unwrap();
            let last = t.last().unwrap();
            assert!(last.objective < first.objective, "{alg:?}");
            assert!(last.subopt >= -1e-8, "{alg:?}");
            assert!((last.objective - f_star - last.subopt).abs() < 1e-12);
        }
    }
}

#[test]
fn online_regret_is_recorded_only_online() {
    let p = gen_synthetic(&ProblemSpec::new(ProblemKind::Lasso, 10, 40, 4, 5), 8).unwrap();
    let mut cfg = ExperimentConfig::new(Algorithm::ProxSgd);
    cfg.rounds = 500;
    cfg.mode = Some(Mode::Online);
    let online = run_experiment(&p, &cfg).unwrap();
    assert!(regret_curve(&online.traces).is_ok());
    cfg.mode = Some(Mode::Stochastic);
    let stochastic = run_experiment(&p, &cfg).unwrap();
    assert!(regret_curve(&stochastic.traces).is_err());
}
