use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use limfix::cauchy::CauchyStructure;
use limfix::limspace::LimOperator;
use limfix::maps::Builtin;
use limfix::oracle::enumerate_maps_verify;
use limfix::solver::{solve_batch, Problem, SolveConfig};
use limfix::{DistanceSpec, Execution, Point};

fn affine_problems(count: usize) -> Vec<Problem> {
    (0..count)
        .map(|k| {
            let c = 0.1 + 0.8 * (k as f64 / count as f64);
            let map = Builtin::Affine {
                a: vec![vec![c / 2.0, c / 4.0], vec![-c / 4.0, c / 2.0]],
                b: vec![1.0, k as f64],
            }
            .build()
            .unwrap();
            Problem {
                map,
                start: Point::Real(vec![0.0, 0.0]),
                structure: CauchyStructure::distance(DistanceSpec::Sup),
                limit: LimOperator::partial_limits(),
                config: SolveConfig::default(),
            }
        })
        .collect()
}

fn bench_batch(c: &mut Criterion) {
    let problems = affine_problems(64);
    let mut group = c.benchmark_group("solve_batch");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(solve_batch(&problems, exec)))
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_maps_verify");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::new("n4", format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(enumerate_maps_verify(4, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_batch, bench_oracle);
criterion_main!(benches);
