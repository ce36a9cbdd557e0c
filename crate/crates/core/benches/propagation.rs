use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dsgc::dynamics::{propagate_interval, SdeModel, Stepper};
use dsgc::engine::{initial_rule, InitialSpec, Marginal};
use dsgc::forcing::{forcing_rule, IncrementTable, SpectralBasis};
use dsgc::reference::{monte_carlo, McConfig};
use dsgc::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn propagation(c: &mut Criterion) {
    let model = SdeModel::intermittent2d(1.0, 1.2, 0.5, 0.5, 0.5).unwrap();
    let init = InitialSpec::product(
        vec![Marginal::Normal { mean: 1.0, var: 0.026 }, Marginal::Normal { mean: 0.0, var: 0.0625 }],
        vec![5, 5],
    )
    .unwrap();
    let u = initial_rule(&init).unwrap();
    let xi = forcing_rule(4, 3, false).unwrap();
    let table = IncrementTable::new(SpectralBasis::new(0.0, 0.05, 2).unwrap(), 50).unwrap();
    let mut g = c.benchmark_group("propagate_interval");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| propagate_interval(&model, &u, &xi, &table, Stepper::WeakRk2, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo_paths(c: &mut Criterion) {
    let base = McConfig {
        model: SdeModel::cir(4.0, 0.6, 1.0).unwrap(),
        stepper: Stepper::MilsteinCir,
        delta_tau: 1e-3,
        t_final: 0.5,
        samples: 20_000,
        repeats: 1,
        seed: 11,
        initial: vec![Marginal::Point(1.0)],
        cadence: 100,
        execution: Execution::Sequential,
    };
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = McConfig { execution: exec, ..base.clone() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| b.iter(|| monte_carlo(cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, propagation, monte_carlo_paths);
criterion_main!(benches);
