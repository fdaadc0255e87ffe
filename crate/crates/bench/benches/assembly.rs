use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use surfflow::operators::{
    assemble_graddiv_block, assemble_projection_laplacian, assemble_rotrot_block,
};
use surfflow_bench::torus_discretization;

fn viscous_blocks(c: &mut Criterion) {
    let mut group = c.benchmark_group("viscous_block");
    group.sample_size(10);
    for n in [32, 64, 128] {
        let disc = torus_discretization(n);
        let dofs = 3 * disc.num_vertices();
        group.bench_with_input(BenchmarkId::new("rotrot", dofs), &disc, |b, d| {
            b.iter(|| assemble_rotrot_block(d))
        });
        group.bench_with_input(BenchmarkId::new("graddiv", dofs), &disc, |b, d| {
            b.iter(|| assemble_graddiv_block(d))
        });
    }
    group.finish();
}

fn pressure_operator(c: &mut Criterion) {
    let disc = torus_discretization(64);
    c.bench_function("projection_laplacian_64", |b| {
        b.iter(|| assemble_projection_laplacian(&disc))
    });
}

criterion_group!(benches, viscous_blocks, pressure_operator);
criterion_main!(benches);
