use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use discon_bench::{disk_carrier, wobbly_torus};
use discon_core::barycentric::{karcher_mean, BarycentricPoint, KarcherConfig, Sphere};
use discon_core::packing::{layout, solve_maximal_hyperbolic};
use discon_core::vertexscale::flatten;
use discon_core::{CurvatureTarget, SolverConfig};
use nalgebra::Vector3;

fn maximal_packing(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_maximal_hyperbolic");
    g.sample_size(10);
    for n in [8, 16, 32] {
        let fill = disk_carrier(n);
        let cfg = SolverConfig { tol: 1e-13, ..SolverConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(n), &fill, |b, f| {
            b.iter(|| solve_maximal_hyperbolic(black_box(&f.triangulation), &cfg).unwrap())
        });
    }
    g.finish();
}

fn packing_layout(c: &mut Criterion) {
    let mut g = c.benchmark_group("layout");
    for n in [16, 32] {
        let fill = disk_carrier(n);
        let t = &fill.triangulation;
        let (label, _) = solve_maximal_hyperbolic(t, &SolverConfig { tol: 1e-13, ..SolverConfig::default() }).unwrap();
        let a = fill.anchor_vertex;
        let nb = t.neighbors(a)[0];
        g.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| layout(t, black_box(&label), a, nb, 1e-10).unwrap()));
    }
    g.finish();
}

fn vertex_scaling(c: &mut Criterion) {
    let mut g = c.benchmark_group("flatten_torus");
    g.sample_size(10);
    for k in [6, 12] {
        let (t, l) = wobbly_torus(k);
        let target = CurvatureTarget::flat_torus(&t).unwrap();
        g.bench_function(BenchmarkId::from_parameter(k), |b| b.iter(|| flatten(&t, black_box(&l), &target, 1e-10, 50).unwrap()));
    }
    g.finish();
}

fn karcher(c: &mut Criterion) {
    let s = Sphere { rho: 1.0 };
    let p = [Vector3::new(0.3, 0.0, 1.0), Vector3::new(-0.1, 0.25, 1.0), Vector3::new(0.0, -0.3, 1.0)].map(|v| v.normalize());
    let lambda = BarycentricPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
    let cfg = KarcherConfig::default();
    c.bench_function("karcher_mean_sphere", |b| b.iter(|| karcher_mean(&s, black_box(&p), &lambda, &cfg).unwrap()));
}

criterion_group!(benches, maximal_packing, packing_layout, vertex_scaling, karcher);
criterion_main!(benches);
