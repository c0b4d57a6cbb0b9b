use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use xlim_core::de::{
    find_threshold, witness_trajectory, DiscreteMap, MinSumVariant, ScalarDecoder, ScalarMap, DEFAULT_MAX_ITERS,
};
use xlim_core::rprocess::{bd_exact_tail, fit_tail, BdParams, RParams};

fn thresholds(c: &mut Criterion) {
    let galb = ScalarMap::new(ScalarDecoder::GalB, 3, 6).unwrap();
    let lgalb = ScalarMap::new(ScalarDecoder::LGalB, 3, 6).unwrap();
    let ms2 = DiscreteMap::new(MinSumVariant::MinSum, 2, 3, 6).unwrap();
    c.bench_function("threshold_galb_3_6", |b| b.iter(|| find_threshold(black_box(&galb), 1e-6, DEFAULT_MAX_ITERS, 0.5)));
    c.bench_function("threshold_lgalb_3_6", |b| b.iter(|| find_threshold(black_box(&lgalb), 1e-6, DEFAULT_MAX_ITERS, 0.5)));
    c.bench_function("ms2_trajectory_200", |b| b.iter(|| ms2.trajectory(black_box(0.05), 200).unwrap().len()));
    c.bench_function("witness_de_200", |b| b.iter(|| witness_trajectory(black_box(0.03), 6, 200).unwrap().len()));
}

fn processes(c: &mut Criterion) {
    let bp = BdParams::new(40, 0.2, 0.4, 2.5).unwrap();
    c.bench_function("birth_death_exact", |b| b.iter(|| bd_exact_tail(black_box(&bp)).unwrap()));
    let p = RParams::new(6, 5).unwrap();
    let mut group = c.benchmark_group("rprocess");
    group.sample_size(10);
    group.bench_function("tail_fit_1000", |b| b.iter(|| fit_tail(&[50, 100], 0.05, &p, None, 1000, 3).unwrap().slope));
    group.finish();
}

criterion_group!(benches, thresholds, processes);
criterion_main!(benches);
