use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ecasim_bench::bench_scenario;
use ecasim_core::engine::{run_simulation, Simulation};
use ecasim_core::mac::params::AcParams;
use ecasim_core::mac::smart::{smart_backoff, SiblingView};
use ecasim_core::mac::state::DiagCounters;
use ecasim_core::rng::{substream, StreamRole};
use ecasim_core::station::ProtocolId;

fn slot_stepping(c: &mut Criterion) {
    let mut group = c.benchmark_group("slot_stepping");
    for (label, protocol) in [("edca", ProtocolId::Edca), ("eca_fs", ProtocolId::EcaQosFairShare)] {
        group.bench_with_input(BenchmarkId::new("n20_1000slots", label), &protocol, |b, &p| {
            let scenario = bench_scenario(20, p, 40.0);
            b.iter_batched(
                || Simulation::new(&scenario, 0).unwrap(),
                |mut sim| {
                    for _ in 0..1000 {
                        black_box(sim.step());
                    }
                    sim
                },
                criterion::BatchSize::LargeInput,
            );
        });
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_run_2s");
    group.sample_size(10);
    for (label, protocol) in [("edca", ProtocolId::Edca), ("eca_fs", ProtocolId::EcaQosFairShare)] {
        group.bench_function(label, |b| {
            let scenario = bench_scenario(12, protocol, 2.0);
            b.iter(|| black_box(run_simulation(&scenario, 0).unwrap()));
        });
    }
    group.finish();
}

fn smart_draws(c: &mut Criterion) {
    let params = AcParams { cw_min: 8, cw_max: 256, max_stage: 5, aifsn: 3, txop_limit_us: 0 };
    let siblings = [
        SiblingView { backoff: 5, bd: 7, deterministic: true },
        SiblingView { backoff: 22, bd: 15, deterministic: true },
        SiblingView { backoff: 140, bd: 255, deterministic: false },
    ];
    c.bench_function("smart_backoff_3_siblings", |b| {
        let mut rng = substream(1, 0, 0, 0, StreamRole::Backoff);
        let mut diag = DiagCounters::default();
        b.iter(|| black_box(smart_backoff(&params, 3, &siblings, &mut rng, &mut diag)));
    });
}

criterion_group!(benches, slot_stepping, full_runs, smart_draws);
criterion_main!(benches);
