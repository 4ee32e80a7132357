// Kernel timings, each run inside a one-thread rayon pool and the default
// pool. Build with `--no-default-features` for the purely sequential code.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use crmg::assembly::{assemble_operator, SpaceKind};
use crmg::mesh::{evaluate_coefficient, CoefficientField, Domain};
use crmg::mgcycle::{build_mesh_chain, Hierarchy, MgConfig, MgPreconditioner};
use crmg::operator::LinearOperator;
use std::sync::Arc;

fn pools() -> Vec<(String, Option<rayon::ThreadPool>)> {
    let mut out = vec![("default".to_string(), None)];
    if crmg::par::ENABLED {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        out.push(("1-thread".to_string(), Some(one)));
    }
    out
}

fn run<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn kernels(c: &mut Criterion) {
    let field = CoefficientField::two_squares(1e-3).unwrap();
    let meshes = Arc::new(build_mesh_chain(Domain::Square2d, 0.5, &field, 5).unwrap());
    let h = Hierarchy::assemble(Arc::clone(&meshes), 5, &field).unwrap();
    let b = MgPreconditioner::build(&h, MgConfig::gauss_seidel(1).unwrap()).unwrap();
    let a = h.finest_operator();
    let x: Vec<f64> = (0..a.n_rows()).map(|i| (i as f64 * 0.37).sin()).collect();
    let finest = meshes.last().unwrap();
    let kappa = evaluate_coefficient(&field, finest);

    let mut g = c.benchmark_group("kernels");
    g.sample_size(20);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("spmv_cr_l5", &name), &x, |bch, x| {
            bch.iter(|| run(&pool, || a.spmv(black_box(x)).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("vcycle_gs1_l5", &name), &x, |bch, x| {
            bch.iter(|| run(&pool, || b.apply(black_box(x)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("assemble_cr_l5", &name), |bch| {
            bch.iter(|| run(&pool, || assemble_operator(finest, &kappa, SpaceKind::CrouzeixRaviart).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
