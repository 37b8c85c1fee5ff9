use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use sdot_bench::problem;
use sdot_core::cost::c_transform_unchecked;
use sdot_core::oracle::solve_1d_exact;
use sdot_core::optim::{self, OptimizerConfig};
use sdot_core::{CostFunction, DiscreteTarget, ProjectionBox, SolverState, SourceMeasure, StreamKey, Variant};

fn bench_c_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("c_transform");
    group.throughput(Throughput::Elements(4096));
    for (label, cost) in [("quadratic", CostFunction::quadratic()), ("power1.5", CostFunction::power(1.5).unwrap())] {
        for m in [20, 200, 2000] {
            let (p, g, xs) = problem(10, m, cost, 1);
            group.bench_with_input(BenchmarkId::new(label, m), &m, |b, _| {
                b.iter(|| {
                    let mut acc = 0.0;
                    for x in xs.chunks_exact(10) {
                        acc += c_transform_unchecked(&p.cost, &p.target, &g, x).value;
                    }
                    black_box(acc)
                })
            });
        }
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("sgd_iteration");
    group.throughput(Throughput::Elements(409));
    let (p, g0, xs) = problem(10, 20, CostFunction::power(1.5).unwrap(), 2);
    let bx = ProjectionBox::new(5.0, 20).unwrap();
    for variant in [Variant::Psgd, Variant::Adagrad, Variant::AdamProjected, Variant::SAdamProjected] {
        let cfg = OptimizerConfig::new(variant, 0.01, 0.75, 1, 1, 0).unwrap();
        group.bench_function(variant.name(), |b| {
            b.iter(|| {
                let mut state = SolverState::new(g0.clone());
                for x in xs.chunks_exact(10) {
                    let grad = p.subgradient_sample(&state.g, x).unwrap().to_vec();
                    optim::step(&mut state, &cfg, &bx, &grad);
                }
                black_box(state.g_bar)
            })
        });
    }
    group.finish();
}

fn bench_cell_masses(c: &mut Criterion) {
    let mut group = c.benchmark_group("cell_masses_mc");
    group.sample_size(10);
    let (p, g, _) = problem(10, 20, CostFunction::power(1.5).unwrap(), 3);
    let n = 100_000;
    group.throughput(Throughput::Elements(n as u64));
    group.bench_function("d10_m20", |b| {
        b.iter(|| black_box(p.estimate_cell_masses(&g, StreamKey::new(7), n).unwrap()))
    });
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let src = SourceMeasure::gaussian(vec![0.3], 1.0).unwrap();
    let mut group = c.benchmark_group("solve_1d_exact");
    for m in [10, 100, 1000] {
        let pts: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
        let target = DiscreteTarget::uniform(pts, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &target, |b, t| {
            b.iter(|| black_box(solve_1d_exact(&src, t).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_c_transform, bench_step, bench_cell_masses, bench_oracle);
criterion_main!(benches);
