//! Criterion benchmarks: solver micro-benchmarks plus the harness grid run
//! sequentially and (when the `parallel` feature is on) fanned out across
//! threads with rayon.

use acx::bench::{run_suite, suite_algorithms, BenchSpec};
use acx::problems::{poisson_admixture, power_method, ProblemSpec};
use acx::solver::{solve, AcxConfig, BoxBounds, Norm};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use std::time::Duration;

fn admixture_cfg() -> AcxConfig {
    let mut cfg = AcxConfig::with_schedule(&[3, 2]).unwrap();
    cfg.tol = 1e-7;
    cfg.norm = Norm::Inf;
    cfg.stabilize = true;
    cfg.bounds = Some(
        BoxBounds::new(
            vec![0.0, 0.0, 0.0],
            vec![f64::INFINITY, f64::INFINITY, 1.0],
            0.9,
        )
        .unwrap(),
    );
    cfg
}

fn bench_solver(c: &mut Criterion) {
    let cfg = admixture_cfg();
    c.bench_function("solve/admixture", |b| {
        b.iter(|| {
            let mut m = poisson_admixture();
            let rep = solve(&mut m, black_box(&[8.0, 1.5, 0.4]), &cfg).unwrap();
            black_box(rep.maps)
        })
    });

    let problem = power_method(400, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x0: Vec<f64> = (0..400).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut pcfg = AcxConfig::with_schedule(&[3, 2]).unwrap();
    pcfg.tol = 1e-7;
    c.bench_function("solve/power-400", |b| {
        b.iter(|| {
            let mut m = problem.mapping_problem();
            let rep = solve(&mut m, black_box(&x0), &pcfg).unwrap();
            black_box(rep.maps)
        })
    });
}

fn grid_spec(parallel: bool) -> BenchSpec {
    BenchSpec {
        problems: vec![ProblemSpec {
            name: "admixture".into(),
            dim: None,
            seed: 5,
        }],
        algorithms: suite_algorithms("admixture"),
        draws: 16,
        timeout: Duration::from_secs(30),
        parallel,
    }
}

fn bench_harness(c: &mut Criterion) {
    let mut group = c.benchmark_group("harness");
    group.sample_size(10);
    group.bench_function("grid/sequential", |b| {
        b.iter(|| black_box(run_suite(&grid_spec(false)).unwrap().rows.len()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("grid/parallel", |b| {
        b.iter(|| black_box(run_suite(&grid_spec(true)).unwrap().rows.len()))
    });
    group.finish();
}

criterion_group!(benches, bench_solver, bench_harness);
criterion_main!(benches);
