//! Fixtures shared by the benchmarks.

use sdot_core::rng::StreamKey;
use sdot_core::{CostFunction, DiscreteTarget, Potential, Problem, SourceMeasure};

/// Uniform source on `[0,1]^d`, `m` uniform-weight support points drawn from
/// the same law, a potential with entries in `[-0.1, 0.1]` and 4096 source
/// samples.
pub fn problem(d: usize, m: usize, cost: CostFunction, seed: u64) -> (Problem, Potential, Vec<f64>) {
    let src = SourceMeasure::uniform_cube(d, 0.0, 1.0).expect("valid cube");
    let key = StreamKey::new(seed);
    let target = DiscreteTarget::uniform(src.sample(&mut key.child(0).stream(), m), d).expect("valid target");
    let g = SourceMeasure::uniform_cube(1, -0.1, 0.1)
        .expect("valid interval")
        .sample(&mut key.child(1).stream(), m);
    let xs = src.sample(&mut key.child(2).stream(), 4096);
    let problem = Problem::new(cost, target, src).expect("valid problem");
    (problem, Potential::new(g).expect("finite"), xs)
}
