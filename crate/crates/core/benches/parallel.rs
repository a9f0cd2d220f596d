//! Sequential against rayon execution on the three data-parallel workloads:
//! the string method (bead updates), the sampled threshold constant and the
//! lambda sweep.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use double_phase::cli::{Instance, RunConfig};
use double_phase::parallel::Execution;
use double_phase::solvers::{estimate_c_tau, mountain_pass_solve, sweep, SolverOptions};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn instance(name: &str) -> Instance {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    Instance::new(RunConfig::load(&path).unwrap(), Execution::Sequential).unwrap()
}

fn mountain_pass(c: &mut Criterion) {
    let inst = instance("supercritical_annulus.json");
    let mut group = c.benchmark_group("mountain_pass");
    group.sample_size(10);
    for (label, execution) in MODES {
        let opts = SolverOptions { execution, ..inst.options };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| black_box(mountain_pass_solve(&inst.spec, &inst.grid, &opts).unwrap().level))
        });
    }
    group.finish();
}

fn c_tau(c: &mut Criterion) {
    let inst = instance("vanishing_boundary.json");
    let mut group = c.benchmark_group("c_tau_sampling");
    group.sample_size(20);
    for (label, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| black_box(estimate_c_tau(&inst.spec, &inst.grid, 1.0, 2000, 1, execution).unwrap()))
        });
    }
    group.finish();
}

fn lambda_sweep(c: &mut Criterion) {
    let inst = instance("vanishing_boundary.json");
    let lambdas = inst.sweep_lambdas();
    let mut group = c.benchmark_group("lambda_sweep");
    group.sample_size(10);
    for (label, execution) in MODES {
        let opts = SolverOptions { execution, ..inst.options };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| black_box(sweep(&inst.spec, &inst.grid, &lambdas, &opts).len()))
        });
    }
    group.finish();
}

criterion_group!(benches, mountain_pass, c_tau, lambda_sweep);
criterion_main!(benches);
