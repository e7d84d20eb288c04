use capasym_core::asymptotics::{coeff_iterate, hyp2f1, j1_closed, j1_quadrature, LiouvilleFrame};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_coeff_iterate(c: &mut Criterion) {
    let frame = LiouvilleFrame::new(0.8).unwrap();
    c.bench_function("coeff_iterate n=6 N=30 (eps=0.8, T=6.855)", |b| {
        b.iter(|| coeff_iterate(black_box(&frame), 6.855, -0.5844498, -0.0395240, 6, 30).unwrap())
    });
}

fn bench_moments(c: &mut Criterion) {
    let frame = LiouvilleFrame::new(0.1).unwrap();
    c.bench_function("j1_closed j=3 k=3 m=5", |b| {
        b.iter(|| j1_closed(3, 3, 5, black_box(&frame), 6.855).unwrap())
    });
    c.bench_function("j1_quadrature j=3 k=3 m=5 (lam=0.25)", |b| {
        b.iter(|| j1_quadrature(3, 3, 5, black_box(&frame), 6.855).unwrap())
    });
}

fn bench_hyp2f1(c: &mut Criterion) {
    c.bench_function("hyp2f1(1, 1.5; 3; -0.8)", |b| {
        b.iter(|| hyp2f1(1.0, 1.5, 3.0, black_box(-0.8)).unwrap())
    });
}

criterion_group!(benches, bench_coeff_iterate, bench_moments, bench_hyp2f1);
criterion_main!(benches);
