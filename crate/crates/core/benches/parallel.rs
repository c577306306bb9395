use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realdec::decnorm::dec_norm_with;
use realdec::opsys::complexify_map;
use realdec::sdp::SolverOptions;
use realdec::suite::{random, run_suite_with, SuiteOptions};
use realdec::{Execution, MatrixSystem};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn dec_norm_modes(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m2 = Arc::new(MatrixSystem::full_real(2).unwrap());
    let m3 = Arc::new(MatrixSystem::full_real(3).unwrap());
    let small = random::general_map(&mut rng, &m2, &m3).unwrap();
    let large = complexify_map(&random::general_map(&mut rng, &m2, &m2).unwrap()).unwrap();

    let mut g = c.benchmark_group("dec_norm");
    g.sample_size(10);
    for (label, u) in [("m2_to_m3", &small), ("complexified_m2", &large)] {
        for (mode, execution) in MODES {
            let opts = SolverOptions {
                execution,
                ..SolverOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(mode, label), u, |b, u| {
                b.iter(|| dec_norm_with(u, &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn suite_modes(c: &mut Criterion) {
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    for (mode, execution) in MODES {
        let opts = SuiteOptions {
            execution,
            ..SuiteOptions::new(1, 8)
        };
        g.bench_function(BenchmarkId::new(mode, "ordering"), |b| {
            b.iter(|| run_suite_with("ordering", &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dec_norm_modes, suite_modes);
criterion_main!(benches);
