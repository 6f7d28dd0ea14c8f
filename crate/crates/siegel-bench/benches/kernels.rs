use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use siegel::linalg::{sym_eigen, ToleranceProfile};
use siegel::orthospectrum::basmajian_partial_sums;
use siegel::siegel::cross_ratio;
use siegel::surface::shilov_data;
use siegel_bench::{diagonal_pants, maximal_quadruple, symmetric};

fn linalg(c: &mut Criterion) {
    let tol = ToleranceProfile::default();
    let mut g = c.benchmark_group("sym_eigen");
    for n in [2usize, 4, 8] {
        let m = symmetric(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| sym_eigen(black_box(m), &tol).unwrap())
        });
    }
    g.finish();
}

fn geometry(c: &mut Criterion) {
    let tol = ToleranceProfile::default();
    let mut g = c.benchmark_group("cross_ratio");
    for n in [1usize, 2, 3] {
        let l = maximal_quadruple(n, &tol);
        g.bench_with_input(BenchmarkId::from_parameter(n), &l, |b, l| {
            b.iter(|| cross_ratio(&l[0], &l[1], &l[2], &l[3], &tol).unwrap())
        });
    }
    g.finish();
    let mut g = c.benchmark_group("shilov_data");
    for n in [1usize, 2, 3] {
        let rho = diagonal_pants(n, &tol);
        let gamma = rho.evaluate_word(rho.spec().peripheral(0));
        g.bench_with_input(BenchmarkId::from_parameter(n), &gamma, |b, gamma| {
            b.iter(|| shilov_data(black_box(gamma), &tol).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let tol = ToleranceProfile::default();
    let mut g = c.benchmark_group("orthospectrum");
    g.sample_size(10);
    for (n, depth) in [(1usize, 4usize), (2, 3)] {
        let rho = diagonal_pants(n, &tol);
        g.bench_function(format!("n{n}_depth{depth}"), |b| {
            b.iter(|| basmajian_partial_sums(&rho, 0, depth).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, linalg, geometry, enumeration);
criterion_main!(benches);
