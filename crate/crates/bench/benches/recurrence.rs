use criterion::{black_box, criterion_group, criterion_main, Criterion};
use jacobi_spectra::diagnostics::{check_corollary_b, s_sequence};
use jacobi_spectra::recurrence::{poly_eval, EigvecInit};
use jacobi_spectra::sequences::catalog::from_text;
use jacobi_spectra::{CheckConfig, WeightSequence};

fn bench_recurrence(c: &mut Criterion) {
    let seq = from_text("pow:alpha=0.5").unwrap();
    let alpha = WeightSequence::matching(&seq);
    let mut group = c.benchmark_group("recurrence");
    group.bench_function("poly_eval/10000", |b| {
        b.iter(|| poly_eval(&seq, black_box(1.0), 10_000).unwrap())
    });
    group.bench_function("s_sequence/10000", |b| {
        b.iter(|| {
            let init = EigvecInit::polynomial(&seq, 1.0).unwrap();
            s_sequence(&seq, &alpha, black_box(1.0), init, 10_000).unwrap()
        })
    });
    let cfg = CheckConfig::default();
    group.bench_function("check_corollary_b/10000", |b| {
        b.iter(|| check_corollary_b(&seq, 10_000, &cfg).unwrap())
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_recurrence
}
criterion_main!(benches);
