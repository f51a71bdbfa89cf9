// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use momentburst::baselines::{delta_series, SliceCounts};
use momentburst::features::scan_windows;
use momentburst::{AverageMode, BaselineMethod, FeatureConfig, SeedLexicon, StreamConfig};
use momentburst_bench::stream;

fn bench_features(c: &mut Criterion) {
    let messages = stream(900, 1);
    let cfg = StreamConfig::default();
    let features = FeatureConfig::for_stream(&cfg);
    let mut group = c.benchmark_group("windowing_features");
    group.throughput(Throughput::Elements(messages.len() as u64));
    group.sample_size(10);
    group.bench_function("scan_900s", |b| {
        b.iter(|| {
            let mut vectors = 0usize;
            scan_windows(black_box(&messages), cfg, &features, |_, cands, normalized| {
                vectors += cands.len() + normalized.len();
                Ok(())
            })
            .unwrap();
            black_box(vectors)
        })
    });
    group.finish();
}

fn bench_baselines(c: &mut Criterion) {
    let messages = stream(900, 2);
    let cfg = StreamConfig::default();
    let lexicon = SeedLexicon::combined();
    let mut group = c.benchmark_group("baselines");
    group.throughput(Throughput::Elements(messages.len() as u64));
    group.sample_size(20);
    group.bench_function("tokenburst_900s", |b| {
        b.iter(|| {
            let counts = SliceCounts::tally(black_box(&messages), &cfg, &lexicon);
            black_box(delta_series(BaselineMethod::TokenBurst, &counts, cfg.k, AverageMode::Prior))
        })
    });
    group.finish();
}

criterion_group!(benches, bench_features, bench_baselines);
criterion_main!(benches);
