use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flexhull::domain::{make_battery, make_pv, make_wind};
use flexhull::oracle::{inner_fit_grid, minkowski_sample};
use flexhull::prototype::regular_prototype;
use flexhull::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_minkowski(c: &mut Criterion) {
    let fleet = vec![
        make_battery(4.0, 5.0).unwrap(),
        make_battery(2.5, 3.0).unwrap(),
        make_pv(6.0, 7.0).unwrap(),
        make_wind(8.0, 0.8, 0.6, 7.5, 8.5, 0.8).unwrap(),
        make_wind(5.0, 0.5, 0.4, 4.8, 5.2, 0.8).unwrap(),
    ];
    let mut group = c.benchmark_group("minkowski_sample");
    for n in [10_000usize, 100_000] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| minkowski_sample(&fleet, n, 7, exec))
            });
        }
    }
    group.finish();
}

fn bench_inner_grid(c: &mut Criterion) {
    let d = make_battery(0.999, 1.0).unwrap();
    let square = Arc::new(regular_prototype(4, 0.0).unwrap());
    let mut group = c.benchmark_group("inner_fit_grid");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| inner_fit_grid(&d, &square, 21, 1e-3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_minkowski, bench_inner_grid);
criterion_main!(benches);
