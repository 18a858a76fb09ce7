use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairaudit_bench::{skewed_bounds, skewed_population};
use fairaudit_core::oracle::brute_force_search;
use fairaudit_core::{
    audit_count_all, enumerate_findings, pairwise_search, utility_search, AuditConfig, AuditMode,
    CountConfig, CountThresholds, Exclusions, PairwiseConfig, Ratio, UtilityConfig,
};

fn count(c: &mut Criterion) {
    let mut group = c.benchmark_group("count");
    for m in [8, 12, 16] {
        let d = skewed_population(m, 4, 500, 1);
        // no single PSV qualifies, so the search walks deeper levels
        let cfg = CountConfig::new(
            CountThresholds::fractional(Ratio::new(1, 20), Ratio::new(3, 5)).unwrap(),
        );
        group.bench_with_input(BenchmarkId::new("search", m), &d, |b, d| {
            b.iter(|| audit_count_all(d, &cfg, &Exclusions::none()))
        });
        if m <= 12 {
            group.bench_with_input(BenchmarkId::new("brute_force", m), &d, |b, d| {
                b.iter(|| {
                    brute_force_search(d, &AuditMode::Count(cfg.clone()), &Exclusions::none())
                        .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn utility(c: &mut Criterion) {
    let mut group = c.benchmark_group("utility");
    for m in [8, 12, 16] {
        let d = skewed_population(m, 6, 2000, 2);
        let cfg = UtilityConfig::new(skewed_bounds(6), 500.0).unwrap();
        group.bench_with_input(BenchmarkId::new("search", m), &d, |b, d| {
            b.iter(|| utility_search(d, &cfg, &Exclusions::none()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("enumerate", m), &d, |b, d| {
            let audit = AuditConfig::new(AuditMode::Utility(cfg.clone()), 20);
            b.iter(|| enumerate_findings(d, &audit).unwrap())
        });
    }
    group.finish();
}

fn pairwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise");
    group.sample_size(20);
    for size in [2, 3, 4] {
        let d = skewed_population(12, 4, 500, 3);
        // unreachable gap: every pair up to `size` is examined
        let cfg = PairwiseConfig::new(skewed_bounds(4), 1e9, size).unwrap();
        group.bench_with_input(BenchmarkId::new("exhaustive", size), &d, |b, d| {
            b.iter(|| pairwise_search(d, &cfg, &Exclusions::none()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, count, utility, pairwise);
criterion_main!(benches);
