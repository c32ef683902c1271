use std::hint::black_box;

use basis_forge::conv::{self, Backend};
use basis_forge::{generate, par, repfn, rng, GeneratorKind, GeneratorSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// One worker against the default pool (every available core).
const THREADS: [(&str, usize); 2] = [("1", 1), ("all", 0)];

fn ntt(c: &mut Criterion) {
    let mut g = c.benchmark_group("ntt");
    g.sample_size(10);
    let a: Vec<u64> = (0..1u64 << 18).map(|i| rng::bits(1, i) % 1000).collect();
    let b: Vec<u64> = (0..1u64 << 18).map(|i| rng::bits(2, i) % 1000).collect();
    for (label, t) in THREADS {
        g.bench_with_input(BenchmarkId::new("threads", label), &t, |bch, &t| {
            bch.iter(|| {
                par::with_threads(t, || {
                    conv::convolve(black_box(&a), black_box(&b), 1 << 19, Backend::Ntt)
                })
            })
        });
    }
    g.finish();
}

fn rep_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("rep_table_primes_h3_1e6");
    g.sample_size(10);
    let p = generate(&GeneratorSpec::new(GeneratorKind::Primes, 1_000_000)).unwrap();
    for (label, t) in THREADS {
        g.bench_with_input(BenchmarkId::new("threads", label), &t, |bch, &t| {
            bch.iter(|| par::with_threads(t, || repfn::rep_table(black_box(&p), 3, 1_000_000)))
        });
    }
    g.finish();
}

criterion_group!(benches, ntt, rep_table);
criterion_main!(benches);
