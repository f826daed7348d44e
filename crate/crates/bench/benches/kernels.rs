// Kernel timings. Run with `cargo bench -p fbm-ilt-bench`.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fbm_ilt::constants::compute_d;
use fbm_ilt::functionals::{estimate_local_time, evaluate_f, PairPlan};
use fbm_ilt::gaussian::{CholeskySampler, CirculantSampler};
use fbm_ilt::rng::{stream, Purpose};
use fbm_ilt::{make_gaussian_difference, QuadratureSpec, SamplerKind, TimeGrid};
use fbm_ilt_bench::reference_params;

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("fbm path");
    let mut rng = stream(0, Purpose::Test, 0, 0);
    // the factorization is cubic in n, so Cholesky stops at 1024 points
    for n in [256usize, 1024] {
        let chol = CholeskySampler::new(&TimeGrid::new(1.0, n).unwrap(), 0.75).unwrap();
        group.bench_with_input(BenchmarkId::new("cholesky", n), &n, |b, _| {
            b.iter(|| chol.sample_path(2, &mut rng))
        });
    }
    for n in [256usize, 1024, 16384] {
        let circ = CirculantSampler::new(&TimeGrid::new(1.0, n).unwrap(), 0.75).unwrap();
        group.bench_with_input(BenchmarkId::new("circulant", n), &n, |b, _| {
            b.iter(|| circ.sample_path(2, &mut rng))
        });
    }
    group.finish();
}

fn functionals(c: &mut Criterion) {
    let p = reference_params();
    let f = make_gaussian_difference(2).with_beta(p.beta());
    let mut rng1 = stream(1, Purpose::Test, 1, 0);
    let mut rng2 = stream(1, Purpose::Test, 2, 0);
    let mut group = c.benchmark_group("functional");
    group.sample_size(20);
    for n in [16u64, 64, 128] {
        let plan = PairPlan::for_functional(&p, n, 4.0, SamplerKind::Auto).unwrap();
        let pair = plan.sample(&mut rng1, &mut rng2).unwrap();
        group.bench_with_input(BenchmarkId::new("evaluate_f", n), &n, |b, &n| {
            b.iter(|| evaluate_f(black_box(&pair), &f, n, 4.0).unwrap())
        });
    }
    let eps = 0.025;
    let plan = PairPlan::for_local_time(&p, eps, SamplerKind::Auto).unwrap();
    let pair = plan.sample(&mut rng1, &mut rng2).unwrap();
    group.bench_function("local_time eps=0.025", |b| {
        b.iter(|| estimate_local_time(black_box(&pair), eps).unwrap())
    });
    group.finish();
}

fn constants(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut group = c.benchmark_group("constants");
    group.sample_size(10);
    for (h, d) in [(0.75, 2usize), (0.55, 3)] {
        group.bench_function(format!("compute_d H={h} d={d}"), |b| {
            b.iter(|| compute_d(black_box(h), d, &spec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, samplers, functionals, constants);
criterion_main!(benches);
