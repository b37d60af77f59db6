use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use steiner_core::boost::{boost_weights, draw_table};
use steiner_core::exec::Exec;
use steiner_core::hypercore::{Params, RGraph};
use steiner_core::process::chernoff_harness;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn boost(c: &mut Criterion) {
    let mut group = c.benchmark_group("boost_weights");
    group.sample_size(10);
    let g = RGraph::complete(24, 2);
    let p = Params::new(3, 2, 24).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| boost_weights(black_box(&g), &p, exec).unwrap())
        });
    }
    group.finish();

    let w = boost_weights(&g, &p, Exec::Parallel).unwrap();
    let mut group = c.benchmark_group("draw_table");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| draw_table(black_box(&w), exec))
        });
    }
    group.finish();
}

fn harness(c: &mut Criterion) {
    let mut group = c.benchmark_group("chernoff_harness");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| chernoff_harness(black_box(20_000), 80, 0.25, 0.3, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, boost, harness);
criterion_main!(benches);
