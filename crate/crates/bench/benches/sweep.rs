use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};

use wbt_core::campaign::{self, CampaignConfig};

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let cfg = CampaignConfig {
        z_min: 50,
        z_max: 2_000_000,
        ..CampaignConfig::quick()
    };
    group.throughput(Throughput::Elements(cfg.z_max - cfg.z_min));
    group.bench_function("verify_test_quick_range", |b| {
        b.iter(|| campaign::run_campaign(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
