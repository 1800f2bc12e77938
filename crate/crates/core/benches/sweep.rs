// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ecoprompt_core::farm::policy::Policy;
use ecoprompt_core::footprint::QueryUsage;
use ecoprompt_core::sweep::{estimate_batch, estimate_batch_sequential, simulate_many, simulate_many_sequential};
use ecoprompt_core::Config;

fn footprints(c: &mut Criterion) {
    let config = Config::default();
    let usages: Vec<QueryUsage> = (0..200_000u64).map(|i| QueryUsage::new(i % 97, i % 1500)).collect();
    let mut group = c.benchmark_group("estimate_batch");
    group.bench_function("parallel", |b| {
        b.iter(|| estimate_batch(&config.model, &config.datacenter, &usages))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| estimate_batch_sequential(&config.model, &config.datacenter, &usages))
    });
    group.finish();
}

fn playthroughs(c: &mut Criterion) {
    let config = Config::default();
    let game = Arc::new(config.game.clone());
    let seeds: Vec<u64> = (0..50).collect();
    let mut group = c.benchmark_group("simulate_many");
    group.sample_size(10);
    for policy in [Policy::NeverAi, Policy::AlwaysAi] {
        group.bench_with_input(BenchmarkId::new("parallel", policy), &policy, |b, &p| {
            b.iter(|| simulate_many(&game, &config.model, &seeds, p, 5000).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", policy), &policy, |b, &p| {
            b.iter(|| simulate_many_sequential(&game, &config.model, &seeds, p, 5000).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, footprints, playthroughs);
criterion_main!(benches);
