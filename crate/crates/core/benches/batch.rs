use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use seqsense::model::UtilityParams;
use seqsense::policies::{solve_single_dp, PolicyKind, Strategy, DP_CELLS, DP_GRID};
use seqsense::sim::batch::THREADS_ENV;
use seqsense::sim::{presets, run_episodes};

// Without the `parallel` feature both variants run the sequential path.
const MODES: [(&str, &str); 2] = [("sequential", "1"), ("parallel", "0")];

fn episodes(c: &mut Criterion) {
    let cfg = presets::moderate_horizon(40, 1.0, 4000).expect("preset");
    let strategy = Strategy::build(PolicyKind::Alg2, &cfg.resources, &cfg.params).expect("strategy");
    let mut group = c.benchmark_group("episodes");
    group.sample_size(20);
    for (name, threads) in MODES {
        std::env::set_var(THREADS_ENV, threads);
        group.bench_with_input(BenchmarkId::new(name, cfg.episodes), &cfg, |b, cfg| {
            b.iter(|| run_episodes(cfg, &strategy).expect("batch"))
        });
    }
    group.finish();
    std::env::remove_var(THREADS_ENV);
}

fn single_dp(c: &mut Criterion) {
    let spec = presets::single_resource();
    let params = UtilityParams::new(20, 2.0);
    c.bench_function("single_dp_L20", |b| {
        b.iter(|| solve_single_dp(&spec, &params, DP_GRID, DP_CELLS).expect("dp"))
    });
}

criterion_group!(benches, episodes, single_dp);
criterion_main!(benches);
