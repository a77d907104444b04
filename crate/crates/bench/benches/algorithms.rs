use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use noma_bench::{horizon_instance, instance};
use noma_core::baselines::{ath_frame, zz_frame};
use noma_core::exact::{opt_bruteforce_frame, OracleGuard};
use noma_core::learning::{pl_train, LearnerConfig};
use noma_core::online::{bm_j, bms, SlotContext};

fn bench_bm_j(c: &mut Criterion) {
    let mut g = c.benchmark_group("bm_j");
    for m in [100, 1000, 10_000] {
        let inst = instance(m, 1, 20, 3);
        let ctx = SlotContext::from_instance(&inst, 0, 0, &inst.full_budgets(), &vec![false; m]);
        g.bench_with_input(BenchmarkId::from_parameter(m), &ctx, |b, ctx| {
            b.iter(|| bm_j(ctx, 20))
        });
    }
    g.finish();
}

fn bench_bms(c: &mut Criterion) {
    let mut g = c.benchmark_group("bms");
    g.sample_size(20);
    for m in [500, 1000, 2000] {
        let inst = instance(m, 20, 20, 5);
        let budgets = inst.full_budgets();
        g.bench_with_input(BenchmarkId::from_parameter(m), &inst, |b, inst| {
            b.iter(|| bms(inst, 0, &budgets).unwrap())
        });
    }
    g.finish();
}

fn bench_baselines(c: &mut Criterion) {
    let mut g = c.benchmark_group("baselines");
    g.sample_size(20);
    let inst = instance(200, 10, 2, 7);
    g.bench_function("zz_m200", |b| b.iter(|| zz_frame(&inst, 0).unwrap()));
    g.bench_function("ath_m200", |b| b.iter(|| ath_frame(&inst, 0)));
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let inst = instance(20, 10, 2, 11);
    let guard = OracleGuard::unbounded();
    g.bench_function("frame_m20_n10", |b| {
        b.iter(|| opt_bruteforce_frame(&inst, 0, &inst.full_budgets(), &guard).unwrap())
    });
    g.finish();
}

fn bench_pl(c: &mut Criterion) {
    let mut g = c.benchmark_group("pl");
    g.sample_size(10);
    let inst = horizon_instance(10, 4, 5, 2, 13);
    let cfg = LearnerConfig {
        rounds: 50,
        ..LearnerConfig::default()
    };
    g.bench_function("m10_k5_T50", |b| b.iter(|| pl_train(&inst, &cfg).unwrap()));
    g.finish();
}

criterion_group!(
    benches,
    bench_bm_j,
    bench_bms,
    bench_baselines,
    bench_oracle,
    bench_pl
);
criterion_main!(benches);
