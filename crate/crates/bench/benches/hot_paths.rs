use criterion::{black_box, criterion_group, criterion_main, Criterion};

use seqrd_core::*;

fn bench_distortion_trace(c: &mut Criterion) {
    let sched = SourceSchedule::constant(0.7, 1.0, 200).unwrap();
    let rates = vec![2.0; 200];
    c.bench_function("distortion_trace T=200", |b| {
        b.iter(|| distortion_trace(black_box(&sched), black_box(&rates)).unwrap())
    });
}

fn bench_rate_factor(c: &mut Criterion) {
    let policy = RatePolicy::MultiPacket { beta: 0.5, rate: 2.0, packets: 16 };
    c.bench_function("rate_factor multipacket n=16", |b| {
        b.iter(|| rate_factor(black_box(&policy)).unwrap())
    });
}

fn bench_kaspi_rate(c: &mut Criterion) {
    let p = KaspiPoint::new(1.0, 0.5, 0.6, 0.3).unwrap();
    c.bench_function("kaspi_rate coupled point", |b| {
        b.iter(|| kaspi_rate(black_box(&p)).unwrap())
    });
}

fn bench_invert_weighted(c: &mut Criterion) {
    c.bench_function("invert_weighted interior beta", |b| {
        b.iter(|| invert_weighted(black_box(1.0), black_box(0.5), black_box(2.0), black_box(0.4)).unwrap())
    });
}

fn bench_exact_average(c: &mut Criterion) {
    c.bench_function("average_trace exact T=10", |b| {
        b.iter(|| {
            average_trace(
                black_box(0.7),
                1.0,
                2.0,
                0.5,
                10,
                AverageMethod::Exact,
                AlphaConvention::Squared,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_distortion_trace,
    bench_rate_factor,
    bench_kaspi_rate,
    bench_invert_weighted,
    bench_exact_average
);
criterion_main!(benches);
