//! Mining and detection throughput, parallel against single-threaded.
//!
//! With the default `parallel` feature the comparison pits the global rayon
//! pool against a one-thread pool; built with `--no-default-features` the
//! truly sequential code path is benched on its own.

use std::io::Cursor;

use criterion::{criterion_group, criterion_main, Criterion};

use tcmine_core::detect::detect;
use tcmine_core::fixture::{generate_to_string, FixtureConfig, CLASS_PROPERTY};
use tcmine_core::ingest::{ingest_reader, IngestConfig, InputFormat};
use tcmine_core::miner::{mine, Constraint, MiningConfig};
use tcmine_core::store::KgStore;

fn fixture_store(size: u32) -> KgStore {
    let (tsv, _) = generate_to_string(&FixtureConfig { size, ..Default::default() }).unwrap();
    let cfg = IngestConfig {
        class_property: Some(CLASS_PROPERTY.to_string()),
        ..Default::default()
    };
    ingest_reader(Cursor::new(tsv.as_bytes()), InputFormat::Tsv, &cfg).unwrap().0
}

fn mining_config() -> MiningConfig {
    MiningConfig { theta_freq: 100, ..Default::default() }
}

#[cfg(feature = "parallel")]
fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

fn bench_mine(c: &mut Criterion) {
    let store = fixture_store(20_000);
    let config = mining_config();
    let mut group = c.benchmark_group("mine-20k-athletes");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("parallel", |b| b.iter(|| mine(&store, &config).unwrap()));
        group.bench_function("single-thread", |b| {
            b.iter(|| single_threaded(|| mine(&store, &config).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| mine(&store, &config).unwrap()));
    group.finish();
}

fn bench_detect(c: &mut Criterion) {
    let store = fixture_store(20_000);
    let constraints: Vec<Constraint> = mine(&store, &mining_config()).unwrap().constraints;
    let mut group = c.benchmark_group("detect-20k-athletes");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("parallel", |b| b.iter(|| detect(&store, &constraints)));
        group.bench_function("single-thread", |b| {
            b.iter(|| single_threaded(|| detect(&store, &constraints)))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| detect(&store, &constraints)));
    group.finish();
}

criterion_group!(benches, bench_mine, bench_detect);
criterion_main!(benches);
