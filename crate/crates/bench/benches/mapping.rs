use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kvis::scenes::{random_plan, two_rooms_with_door};
use kvis::{dense_inverse, k_field, run_mapper, traverse, CellIndex, MapperConfig};
use kvis_bench::classified_walk;

fn raycast(c: &mut Criterion) {
    let plan = random_plan(256, 256, 12, 1).unwrap();
    let router = plan.routers()[0];
    let spec = plan.spec();
    c.bench_function("traverse 256 diagonal", |b| {
        b.iter(|| {
            traverse(&spec, black_box(CellIndex::new(1, 3)), black_box(CellIndex::new(254, 250)))
                .unwrap()
        })
    });
    let mut group = c.benchmark_group("k_field");
    for size in [64, 128, 256] {
        let plan = random_plan(size, size, size / 16, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &plan, |b, p| {
            b.iter(|| k_field(p, p.routers()[0]).unwrap())
        });
    }
    group.finish();
    let field = k_field(&plan, router).unwrap();
    c.bench_function("dense_inverse 256", |b| b.iter(|| dense_inverse(black_box(&field)).unwrap()));
}

fn mapper(c: &mut Criterion) {
    let plan = two_rooms_with_door(89, 92, 20, 0.05).unwrap();
    let traj = classified_walk(&plan);
    let cfg = MapperConfig::default();
    c.bench_function("run_mapper two rooms", |b| {
        b.iter(|| run_mapper(&traj, plan.routers(), None, &cfg, plan.spec()).unwrap())
    });
}

criterion_group!(benches, raycast, mapper);
criterion_main!(benches);
