use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use jacobi_spectra::sequences::catalog::from_text;
use jacobi_spectra::spectra::{eigenvalues, gauss_measure, sturm_count, truncate};

fn bench_spectra(c: &mut Criterion) {
    let seq = from_text("chihara").unwrap();
    let mut group = c.benchmark_group("spectra");
    for n in [200usize, 2000] {
        let t = truncate(&seq, n).unwrap();
        group.bench_with_input(BenchmarkId::new("sturm_count", n), &t, |b, t| {
            b.iter(|| sturm_count(t, black_box(3.5)))
        });
        group.bench_with_input(BenchmarkId::new("eigenvalues", n), &t, |b, t| {
            b.iter(|| eigenvalues(t, t.default_tolerance()).unwrap())
        });
    }
    let t = truncate(&seq, 30).unwrap();
    group.bench_function("gauss_measure/30", |b| {
        b.iter(|| gauss_measure(&t).unwrap())
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_spectra
}
criterion_main!(benches);
