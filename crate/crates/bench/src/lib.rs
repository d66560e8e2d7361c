//! Criterion benchmarks for the main stages: the `v_n` recursion, the
//! implicit series solves, the fixed-point oracle and the ODE oracle.

use criterion::{black_box, BenchmarkId, Criterion};
use nilreturn::{
    full_turn_series, half_turn_series, integrate_normalized, integrate_original,
    solve_fixed_point, FixedPointConfig, Grid, OdeConfig, VSeries,
};

pub fn benchmarks(c: &mut Criterion) {
    let mut group = c.benchmark_group("vseries");
    for m in [512, 2048, 8192] {
        let grid = Grid::uniform(m).unwrap();
        group.bench_with_input(BenchmarkId::new("order6", m), &grid, |b, g| {
            b.iter(|| VSeries::compute(6, black_box(g)).unwrap())
        });
    }
    group.finish();

    let grid = Grid::uniform(2048).unwrap();
    let vs = VSeries::compute(12, &grid).unwrap();
    c.bench_function("return_map/order12", |b| {
        b.iter(|| {
            let half = half_turn_series(black_box(&vs), 12).unwrap();
            full_turn_series(&half, 12).unwrap()
        })
    });

    let cfg = FixedPointConfig::default();
    c.bench_function("fixed_point/delta0.2", |b| {
        b.iter(|| solve_fixed_point(&grid, black_box(0.2), &cfg).unwrap())
    });

    let ode = OdeConfig::default();
    c.bench_function("ode/original_eps0.3", |b| {
        b.iter(|| integrate_original(black_box(0.3), &ode).unwrap())
    });
    c.bench_function("ode/normalized_alpha0.05", |b| {
        b.iter(|| integrate_normalized(1.0, black_box(0.05), &ode).unwrap())
    });
}
