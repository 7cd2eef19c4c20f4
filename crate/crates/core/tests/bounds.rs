use zzbound_core::engine::compute_bounds;
use zzbound_core::hypo::q_function;
use zzbound_core::oracle::{classical_zzb_scalar, mc_bayes_risk, posterior_mean, PosteriorMeanEstimator};
use zzbound_core::{
    BoundOptions, BoundProblem, DistortionFn, Execution, Flock, GaussianLocationModel, ParamOfInterest, Prior,
    UniformBallPrior, UniformIntervalPrior,
};

fn ball_problem(p: usize, sigma: f64) -> BoundProblem {
    BoundProblem::new(
        GaussianLocationModel::new(p, sigma).unwrap(),
        UniformBallPrior::new(p, 1.0).unwrap().into(),
        ParamOfInterest::Norm,
        Flock::radial(),
    )
    .unwrap()
}

fn small_opts(execution: Execution) -> BoundOptions {
    BoundOptions {
        t_nodes: 513,
        quad_nodes: 1024,
        max_doublings: 1,
        execution,
        ..BoundOptions::default()
    }
}

#[test]
fn refinement_records_levels() {
    let pair = compute_bounds(&ball_problem(2, 0.1), DistortionFn::Squared, &small_opts(Execution::Parallel)).unwrap();
    assert_eq!(pair.levels.len(), 2);
    assert_eq!(pair.levels[1].t_nodes, 1025);
    assert_eq!(pair.levels[1].quad_nodes, 2048);
    assert_eq!(pair.z2.meta.convergence_deltas.len(), 1);
    assert_eq!(pair.z2.value, pair.levels[1].z2);
    assert!(pair.z1.value >= pair.z2.value);
    assert!(pair.z2.value < 0.01);

    let opts = BoundOptions {
        max_doublings: 0,
        ..small_opts(Execution::Sequential)
    };
    let single = compute_bounds(&ball_problem(2, 0.1), DistortionFn::Squared, &opts).unwrap();
    assert!(!single.converged);
    assert_eq!(single.z2.value, pair.levels[0].z2);
}

#[test]
fn scalar_uniform_matches_classical_form() {
    for sigma in [0.3, 0.05] {
        let problem = BoundProblem::new(
            GaussianLocationModel::new(1, sigma).unwrap(),
            UniformIntervalPrior::new(0.0, 1.0).unwrap().into(),
            ParamOfInterest::linear(vec![1.0]).unwrap(),
            Flock::linear(vec![1.0]).unwrap(),
        )
        .unwrap();
        let pair = compute_bounds(&problem, DistortionFn::Squared, &small_opts(Execution::Parallel)).unwrap();
        let oracle = classical_zzb_scalar(1.0, sigma, 2048).unwrap();
        assert!((pair.z2.value - oracle).abs() <= 1e-6 * oracle, "{} vs {oracle}", pair.z2.value);
        assert_eq!(pair.z1.value, pair.z2.value);
    }
}

#[test]
fn absolute_distortion_bound_is_below_oracle_risk() {
    let problem = ball_problem(2, 0.1);
    let pair = compute_bounds(&problem, DistortionFn::Absolute, &small_opts(Execution::Parallel)).unwrap();
    let estimator = PosteriorMeanEstimator {
        model: problem.model,
        prior: problem.prior,
        poi: ParamOfInterest::Norm,
        n_is: 1000,
    };
    let risk = mc_bayes_risk(
        &problem.model,
        &problem.prior,
        &problem.poi,
        &estimator,
        DistortionFn::Absolute,
        4000,
        21,
        Execution::Parallel,
    )
    .unwrap();
    assert!(risk.mean_risk + 3.0 * risk.std_error >= pair.z1.value, "{risk:?} vs {}", pair.z1.value);
}

#[test]
fn execution_modes_agree_bitwise() {
    let problem = ball_problem(3, 0.05);
    let seq = compute_bounds(&problem, DistortionFn::Squared, &small_opts(Execution::Sequential)).unwrap();
    let par = compute_bounds(&problem, DistortionFn::Squared, &small_opts(Execution::Parallel)).unwrap();
    assert_eq!(seq.z1.value.to_bits(), par.z1.value.to_bits());
    assert_eq!(seq.z2.value.to_bits(), par.z2.value.to_bits());
    assert_eq!(seq.z2.curve.g(), par.z2.curve.g());
}

#[test]
fn posterior_mean_of_norm_stays_in_support() {
    let model = GaussianLocationModel::new(2, 0.2).unwrap();
    let prior: Prior = UniformBallPrior::new(2, 1.0).unwrap().into();
    for y in [[0.0, 0.0], [0.9, 0.0], [3.0, -3.0]] {
        let m = posterior_mean(&y, &model, &prior, &ParamOfInterest::Norm, 4000, 5).unwrap();
        assert!((0.0..=1.0).contains(&m), "{y:?}: {m}");
    }
    let again = posterior_mean(&[0.9, 0.0], &model, &prior, &ParamOfInterest::Norm, 4000, 5).unwrap();
    let first = posterior_mean(&[0.9, 0.0], &model, &prior, &ParamOfInterest::Norm, 4000, 5).unwrap();
    assert_eq!(again, first);
}

#[test]
fn q_function_reference_values() {
    assert_eq!(q_function(0.0).unwrap(), 0.5);
    assert!((q_function(2.0).unwrap() - 0.022750131948179195).abs() < 1e-16);
    assert!((q_function(-1.0).unwrap() - 0.8413447460685429).abs() < 1e-15);
}
