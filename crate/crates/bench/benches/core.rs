use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ifsq_bench::{chirp_samples, chirp_train};
use ifsq_core::bandlimited::{analytic_extension, default_order, reconstruct};
use ifsq_core::stft::{default_time_grid, fft_freq_grid, stft_with_derivative, StftMethod};
use ifsq_core::synchrosqueeze::{squeeze_with, SqueezeParams};
use ifsq_core::{gaussian_window, if_information, synchrosqueeze_samples, Basis, Comparison, SsConfig};

fn stft(c: &mut Criterion) {
    let train = chirp_train(0.08).unwrap();
    let window = gaussian_window(0.1).unwrap();
    let freqs = fft_freq_grid(&train, &window, 10.0, Some(0.025)).unwrap();
    let times: Vec<f64> = default_time_grid(&train).into_iter().step_by(10).collect();
    let mut group = c.benchmark_group("stft");
    group.sample_size(10);
    for (name, method) in [("fft", StftMethod::Fft), ("direct", StftMethod::Direct)] {
        group.bench_with_input(BenchmarkId::new(name, times.len()), &method, |b, &method| {
            b.iter(|| stft_with_derivative(black_box(&train), &window, &times, &freqs, method).unwrap())
        });
    }
    group.finish();
}

fn squeeze(c: &mut Criterion) {
    let train = chirp_train(0.08).unwrap();
    let window = gaussian_window(0.1).unwrap();
    let freqs = fft_freq_grid(&train, &window, 10.0, Some(0.025)).unwrap();
    let times = default_time_grid(&train);
    let (v, dv) = stft_with_derivative(&train, &window, &times, &freqs, StftMethod::Auto).unwrap();
    let params = SqueezeParams { alpha: 0.1, gamma: 1e-8, eta_max: 10.0, comparison: Comparison::Modulus };
    c.bench_function("squeeze/chirp", |b| {
        b.iter(|| {
            let omega = if_information(black_box(&v), &dv, params.gamma).unwrap();
            squeeze_with(&omega, &v, &params).unwrap()
        })
    });
    let samples = chirp_samples(0.08).unwrap();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("synchrosqueeze/chirp", |b| {
        b.iter(|| synchrosqueeze_samples(black_box(&samples), &SsConfig::default()).unwrap())
    });
    group.finish();
}

fn bandlimited(c: &mut Criterion) {
    let samples = chirp_samples(0.08).unwrap();
    let order = default_order(&samples);
    let mut group = c.benchmark_group("bandlimited");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("reconstruct", order), |b| {
        b.iter(|| reconstruct(black_box(&samples), order, Basis::Sinc).unwrap())
    });
    let result = reconstruct(&samples, order, Basis::Sinc).unwrap();
    let times: Vec<f64> = (0..=300).map(|k| 0.1 * k as f64).collect();
    group.bench_function("analytic_extension", |b| b.iter(|| analytic_extension(black_box(&result), &times).unwrap()));
    group.finish();
}

criterion_group!(benches, stft, squeeze, bandlimited);
criterion_main!(benches);
