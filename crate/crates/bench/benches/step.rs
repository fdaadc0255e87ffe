use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use surfflow::{Formulation, SimConfig, Simulation};
use surfflow_bench::torus;

fn time_step(c: &mut Criterion) {
    let mesh = torus(64);
    let mut group = c.benchmark_group("step_64x16");
    group.sample_size(10);
    for (name, formulation) in [
        ("problem1", Formulation::Problem1),
        ("problem2", Formulation::Problem2),
    ] {
        let sim = Simulation::new(
            &mesh,
            SimConfig {
                formulation,
                ..Default::default()
            },
        )
        .expect("simulation");
        group.bench_function(name, |b| {
            b.iter_batched(
                || sim.clone(),
                |mut s| s.step().expect("step"),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, time_step);
criterion_main!(benches);
