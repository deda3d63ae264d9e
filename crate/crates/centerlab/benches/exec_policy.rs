use std::hint::black_box;

use centerlab::exactalg::qf;
use centerlab::liapunov::compute_liapunov_constants_with;
use centerlab::numeric::{return_map_with, ReturnMapOptions, Transversal};
use centerlab::perturb::check_no_vanishing_singularities_with;
use centerlab::systems::system;
use centerlab::ExecPolicy;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn return_map_batch(c: &mut Criterion) {
    let s = system("xdot = (-y+y^2)*(x^2+y^2); ydot = (x+2*x^2)*(x^2+y^2)");
    let x0s: Vec<f64> = (1..=32).map(|i| 0.005 * i as f64).collect();
    let opts = ReturnMapOptions::default();
    let mut g = c.benchmark_group("return_map_32");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| {
            b.iter(|| return_map_with(&s, black_box(&x0s), Transversal::PositiveX, &opts, p).unwrap())
        });
    }
    g.finish();
}

fn singular_points(c: &mut Criterion) {
    let s = system("xdot = (-y+y^2)*(x^2+y^2-eps); ydot = (x+2*x^2)*(x^2+y^2-eps)");
    let eps: Vec<_> = [1, 2, 4, 8, 16, 32].iter().map(|d| qf(1, *d)).collect();
    let mut g = c.benchmark_group("vanishing_singularities");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| {
            b.iter(|| check_no_vanishing_singularities_with(&s, black_box(&eps), &qf(1, 1), p).unwrap())
        });
    }
    g.finish();
}

fn liapunov(c: &mut Criterion) {
    let s = system("xdot = y + A*x*y + B*y^2; ydot = -eps*x - x^3 + K*x*y^2 + L*y^3");
    let mut g = c.benchmark_group("liapunov_degree_8");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| b.iter(|| compute_liapunov_constants_with(black_box(&s), 8, p).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, return_map_batch, singular_points, liapunov);
criterion_main!(benches);
