//! Ground truth construction and whole-experiment reproducibility.

use sdot_core::experiment::{
    build_box, make_ground_truth, map_error_mc, run_experiment, BoxSpec, EvalSpec, ExperimentSpec, GroundTruthSpec,
    MapErrorMode, OptimizerSpec, StepRule, TargetSpec,
};
use sdot_core::optim::AdamParams;
use sdot_core::oracle::{map_error_exact_1d, solve_1d_exact};
use sdot_core::{CostFunction, Problem, SourceMeasure, StreamKey, Variant};

fn psgd(name: &str, iters: u64) -> OptimizerSpec {
    OptimizerSpec {
        name: name.into(),
        variant: Variant::Psgd,
        gamma1: StepRule::Diam,
        b: 0.75,
        batch: 1,
        iters,
        adam: AdamParams::default(),
    }
}

fn sqrt_spec() -> ExperimentSpec {
    ExperimentSpec {
        name: "sqrt".into(),
        seed: 5,
        repeats: 3,
        cost: CostFunction::quadratic(),
        source: SourceMeasure::SqrtDensity1D,
        target: TargetSpec::UniformCube { m: 6, lo: 0.0, hi: 1.0 },
        ground_truth: GroundTruthSpec::Random { scale: 1e-4, n_reference: None },
        box_spec: BoxSpec::CentralInterval,
        eval: EvalSpec { n_eval: 2000, map_error: MapErrorMode::Exact, ..EvalSpec::default() },
        optimizers: vec![psgd("psgd", 3000)],
    }
}

fn cube_spec() -> ExperimentSpec {
    ExperimentSpec {
        name: "cube".into(),
        seed: 6,
        repeats: 3,
        cost: CostFunction::power(1.5).unwrap(),
        source: SourceMeasure::uniform_cube(3, 0.0, 1.0).unwrap(),
        target: TargetSpec::UniformCube { m: 5, lo: 0.0, hi: 1.0 },
        ground_truth: GroundTruthSpec::Random { scale: 0.1, n_reference: Some(200_000) },
        box_spec: BoxSpec::Compact(sdot_core::Compact::cube_uniform(3, 0.0, 1.0)),
        eval: EvalSpec { n_eval: 2000, ..EvalSpec::default() },
        optimizers: vec![psgd("a", 2000), OptimizerSpec { variant: Variant::Adagrad, ..psgd("b", 2000) }],
    }
}

#[test]
fn exact_ground_truth_agrees_with_the_quantile_solver() {
    let spec = sqrt_spec();
    for r in 0..5 {
        let gt = make_ground_truth(&spec, StreamKey::new(spec.seed).child(r)).unwrap();
        let o = solve_1d_exact(&spec.source, &gt.target).unwrap();
        assert!(o.g_star.gauge_equal(&gt.g_star, 1e-9), "repeat {r}: {:?} vs {:?}", o.g_star, gt.g_star);
        assert!(gt.oracle.is_some());
        let bx = build_box(&spec, &gt, StreamKey::new(0)).unwrap();
        assert!(bx.contains(&gt.g_star.first_fixed()));
    }
}

#[test]
fn sampled_ground_truth_is_admissible() {
    let spec = cube_spec();
    let gt = make_ground_truth(&spec, StreamKey::new(spec.seed).child(0)).unwrap();
    let w = gt.target.weights();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(gt.target.min_weight() >= 10.0 / 200_000.0);
    assert!(gt.g_star.iter().map(|v| v.abs()).fold(0.0, f64::max) <= 0.1);
    assert!(gt.g_star.iter().sum::<f64>().abs() < 1e-12);
    build_box(&spec, &gt, StreamKey::new(0)).unwrap();
    // same key, same ground truth
    let again = make_ground_truth(&spec, StreamKey::new(spec.seed).child(0)).unwrap();
    assert_eq!(gt.g_star, again.g_star);
    assert_eq!(gt.target, again.target);
}

#[test]
fn oversized_ground_truth_scale_is_a_config_error() {
    let mut spec = sqrt_spec();
    spec.ground_truth = GroundTruthSpec::Random { scale: 10.0, n_reference: None };
    let err = make_ground_truth(&spec, StreamKey::new(1)).unwrap_err();
    assert!(err.to_string().contains("scale"), "{err}");
}

#[test]
fn monte_carlo_map_error_matches_exact_integral() {
    let spec = sqrt_spec();
    let gt = make_ground_truth(&spec, StreamKey::new(spec.seed).child(1)).unwrap();
    let oracle = gt.oracle.as_ref().unwrap();
    let problem = Problem::new(spec.cost, gt.target.clone(), spec.source.clone()).unwrap();
    let g: Vec<f64> = gt.g_star.iter().enumerate().map(|(i, v)| v + 0.002 * (i as f64 - 2.5)).collect();
    for p in [1.0, 2.0] {
        let exact = map_error_exact_1d(oracle, &g, p).unwrap();
        assert!(exact > 0.0);
        let mc = map_error_mc(&problem, &g, &gt.g_star, StreamKey::new(31), 200_000, p).unwrap();
        let diff = (mc.pth_power.mean - exact).abs();
        assert!(diff <= 4.0 * mc.pth_power.std_err() + 1e-12, "p={p}: mc {} exact {exact}", mc.pth_power.mean);
    }
}

fn all_csv(spec: &ExperimentSpec) -> Vec<String> {
    let res = run_experiment(spec).unwrap();
    let mut out: Vec<String> = res.traces.iter().flatten().map(|t| t.to_csv(false)).collect();
    out.push(res.summary_csv());
    out
}

#[test]
fn experiments_do_not_depend_on_the_thread_count() {
    for spec in [sqrt_spec(), cube_spec()] {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| all_csv(&spec));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| all_csv(&spec));
        assert_eq!(one, four, "{}", spec.name);
        assert_eq!(one, all_csv(&spec));
        let mut other = spec.clone();
        other.seed += 1;
        assert_ne!(one, all_csv(&other));
    }
}

#[test]
fn experiment_result_layout() {
    let spec = cube_spec();
    let res = run_experiment(&spec).unwrap();
    assert_eq!(res.config_names, ["a", "b"]);
    assert_eq!(res.traces.len(), 2);
    assert!(res.traces.iter().all(|t| t.len() == 3));
    assert_eq!(res.summary.len(), 2 * sdot_core::trace::Metric::ALL.len());
    let csv = res.summary_csv();
    assert_eq!(csv.lines().count(), 1 + res.summary.len());
    assert!(csv.starts_with("config,metric,slope,slope_stderr,n_points,final_value\n"));
    // errors shrink from the first checkpoint to the last
    for mean in &res.means {
        let (first, last) = (&mean.checkpoints[0], mean.checkpoints.last().unwrap());
        assert!(last.pot_err_avg < first.pot_err_avg);
    }
}
