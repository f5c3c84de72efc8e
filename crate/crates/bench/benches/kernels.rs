use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rmlab::analysis::LayeredNoiseJoint;
use rmlab::decoder::{bitmap_decode_exact, ml_decode_exact};
use rmlab::f2::enumerate_subspaces;
use rmlab::info::{convolve_with, fwht};
use rmlab::rm::full_transform;
use rmlab_bench::{noisy_word, random_distribution, random_vector};

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("full_transform");
    for m in [6usize, 10, 14] {
        let v = random_vector(1 << m, m as u64);
        g.bench_with_input(BenchmarkId::from_parameter(m), &v, |b, v| {
            b.iter(|| full_transform(m, black_box(v)))
        });
    }
    g.finish();
}

fn walsh(c: &mut Criterion) {
    let mut g = c.benchmark_group("fwht");
    for k in [8usize, 12, 16] {
        let p = random_distribution(k, 1);
        g.bench_with_input(BenchmarkId::from_parameter(k), &p, |b, p| {
            b.iter(|| {
                let mut a = p.probs().to_vec();
                fwht(black_box(&mut a));
                a
            })
        });
    }
    g.finish();

    let mut g = c.benchmark_group("convolve");
    for k in [4usize, 8] {
        let p = random_distribution(k, 2);
        let q = random_distribution(k, 3);
        for (name, wht) in [("direct", false), ("transform", true)] {
            g.bench_function(BenchmarkId::new(name, k), |b| {
                b.iter(|| convolve_with(black_box(&p), black_box(&q), wht).unwrap())
            });
        }
    }
    g.finish();
}

fn layers(c: &mut Criterion) {
    let mut g = c.benchmark_group("layer_entropies");
    g.sample_size(10);
    for m in [3usize, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| LayeredNoiseJoint::new(m, 0.1).unwrap().profile())
        });
    }
    g.finish();
}

fn decoding(c: &mut Criterion) {
    let mut g = c.benchmark_group("decode");
    for (m, r) in [(4usize, 1usize), (5, 1), (4, 2)] {
        let (cb, ch, y) = noisy_word(m, r, 0.1, 7);
        g.bench_function(BenchmarkId::new("bitmap", format!("{m},{r}")), |b| {
            b.iter(|| bitmap_decode_exact(&cb, black_box(&y), &ch).unwrap())
        });
        g.bench_function(BenchmarkId::new("ml", format!("{m},{r}")), |b| {
            b.iter(|| ml_decode_exact(&cb, black_box(&y), &ch).unwrap())
        });
    }
    g.finish();
}

fn subspaces(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_subspaces");
    for d in [3usize, 4, 5] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| enumerate_subspaces(d).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, transform, walsh, layers, decoding, subspaces);
criterion_main!(benches);
