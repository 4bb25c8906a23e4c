//! The modified STFT and the impulse-train representation against
//! independently computed references.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifsq_core::stft::{fft_freq_grid, stft_with_derivative, StftMethod};
use ifsq_core::{
    bessel_j0, gaussian_window, if_information, modified_stft, to_impulse_train, FreqGrid, ImpulseTrain, Interval,
    SampledSignal, SamplingSchedule, TimeFreqMap, Window,
};

fn random_train(seed: u64, count: usize) -> ImpulseTrain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid_dt = 0.01;
    let mut idx: Vec<usize> = (0..count).map(|_| rng.random_range(0..1000)).collect();
    idx.sort_unstable();
    idx.dedup();
    let times: Vec<f64> = idx.iter().map(|&i| i as f64 * grid_dt).collect();
    let weights: Vec<Complex64> =
        times.iter().map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    ImpulseTrain::from_weighted(&times, &weights, grid_dt, 0.2).unwrap()
}

/// Untruncated sum over every impulse.
fn oracle_stft(train: &ImpulseTrain, window: &Window, t: f64, eta: f64, order: usize) -> Complex64 {
    train
        .impulses()
        .map(|(i, w)| {
            let u = train.grid_time(i) - t;
            w * window.derivative_of_order(order, u) * Complex64::cis(-2.0 * PI * eta * u)
        })
        .sum()
}

fn max_rel(a: &TimeFreqMap, b: &TimeFreqMap) -> f64 {
    let scale = b.max_abs();
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn fft_and_direct_agree_with_brute_force() {
    for seed in [1, 2, 3] {
        let train = random_train(seed, 50);
        let window = gaussian_window(0.5).unwrap();
        let freqs = fft_freq_grid(&train, &window, 20.0, Some(0.05)).unwrap();
        let times: Vec<f64> = (0..=40).map(|m| 0.25 * m as f64).collect();
        let (fft, dfft) = stft_with_derivative(&train, &window, &times, &freqs, StftMethod::Fft).unwrap();
        let (direct, ddirect) = stft_with_derivative(&train, &window, &times, &freqs, StftMethod::Direct).unwrap();
        assert!(max_rel(&fft, &direct) <= 1e-10, "seed {seed}: {}", max_rel(&fft, &direct));
        assert!(max_rel(&dfft, &ddirect) <= 1e-10);

        let values = times
            .iter()
            .flat_map(|&t| freqs.iter().map(move |eta| (t, eta)).collect::<Vec<_>>())
            .map(|(t, eta)| oracle_stft(&train, &window, t, eta, 0))
            .collect();
        let oracle = TimeFreqMap { times: times.clone(), freqs, values };
        assert!(max_rel(&fft, &oracle) <= 1e-10, "seed {seed}: {}", max_rel(&fft, &oracle));
    }
}

#[test]
fn time_derivative_matches_finite_differences() {
    let train = random_train(7, 50);
    let window = gaussian_window(0.5).unwrap();
    let freqs = FreqGrid::new(0.1, 100).unwrap();
    let times = [2.013, 4.5, 6.77];
    let h = 1e-5;
    let (_, dv) = stft_with_derivative(&train, &window, &times, &freqs, StftMethod::Direct).unwrap();
    let plus: Vec<f64> = times.iter().map(|t| t + h).collect();
    let minus: Vec<f64> = times.iter().map(|t| t - h).collect();
    let vp = modified_stft(&train, &window, &plus, &freqs).unwrap();
    let vm = modified_stft(&train, &window, &minus, &freqs).unwrap();
    let scale = dv.max_abs();
    for (k, d) in dv.values.iter().enumerate() {
        let fd = (vp.values[k] - vm.values[k]) / (2.0 * h);
        assert!((d - fd).norm() <= 1e-5 * scale, "cell {k}: {d} vs {fd}");
    }
}

fn dense_signal(dt: f64, end: f64, f: impl Fn(f64) -> Complex64) -> SampledSignal {
    let schedule = SamplingSchedule::uniform(dt, Interval::new(0.0, end).unwrap()).unwrap();
    let values = schedule.times().iter().map(|&t| f(t)).collect();
    SampledSignal::new(schedule, values).unwrap()
}

#[test]
fn dense_tone_matches_window_spectrum() {
    // V(t, eta) of exp(2 pi i f0 t) is exp(2 pi i f0 t) g^(eta - f0) away from the ends.
    let f0 = 2.0;
    let signal = dense_signal(0.01, 20.0, |t| Complex64::cis(2.0 * PI * f0 * t));
    let train = to_impulse_train(&signal, 0.01).unwrap();
    let window = gaussian_window(1.0).unwrap();
    let freqs = FreqGrid::new(0.05, 100).unwrap();
    let times = [8.0, 10.0, 12.37];
    let v = modified_stft(&train, &window, &times, &freqs).unwrap();
    for (m, &t) in times.iter().enumerate() {
        let t = train.grid_time(((t - train.grid_start()) / 0.01).round() as usize);
        assert!((t - times[m]).abs() < 1e-9);
        for j in 0..freqs.len {
            let eta = freqs.freq(j);
            let expected = Complex64::cis(2.0 * PI * f0 * t) * window.spectrum(eta - f0);
            assert!((v.get(m, j) - expected).norm() < 1e-9, "t={t} eta={eta}");
        }
    }
}

#[test]
fn linear_chirp_if_information_matches_gaussian_closed_form() {
    // For exp(2 pi i (f0 t + c t^2 / 2)) and g = exp(-s pi u^2), completing the
    // square gives omega = phi' + (eta - phi') c^2/(s^2+c^2) + i (phi' - eta) c s/(s^2+c^2).
    let (f0, c, s) = (1.0, 0.3, 0.5);
    let signal = dense_signal(0.005, 30.0, |t| Complex64::cis(2.0 * PI * (f0 * t + 0.5 * c * t * t)));
    let train = to_impulse_train(&signal, 0.005).unwrap();
    let window = gaussian_window(s).unwrap();
    let freqs = FreqGrid::new(0.1, 60).unwrap();
    let times = [10.0, 15.0, 20.0];
    let (v, dv) = stft_with_derivative(&train, &window, &times, &freqs, StftMethod::Direct).unwrap();
    let omega = if_information(&v, &dv, 1e-6).unwrap();
    let denom = s * s + c * c;
    let mut checked = 0;
    for (m, &t) in times.iter().enumerate() {
        let phi1 = f0 + c * t;
        for j in 0..freqs.len {
            let Some(w) = omega.get(m, j) else { continue };
            let eta = freqs.freq(j);
            let expected = Complex64::new(phi1 + (eta - phi1) * c * c / denom, (phi1 - eta) * c * s / denom);
            assert!((w - expected).norm() < 1e-6, "t={t} eta={eta}: {w} vs {expected}");
            checked += 1;
        }
    }
    assert!(checked > 60);
}

#[test]
fn impulse_trains_converge_weakly() {
    // <train, h> -> int f h with f = cos(2 pi t), h = exp(-pi (t-5)^2); the
    // limit is exp(-pi) cos(10 pi) = exp(-pi).
    let exact = (-PI).exp();
    let h = |t: f64| (-PI * (t - 5.0) * (t - 5.0)).exp();
    // Errors fall roughly like T^2 as the schedule is refined.
    for t_base in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        for seed in 0..4 {
            let schedule =
                SamplingSchedule::perturbed(t_base, 0.5 * t_base, Interval::new(0.0, 10.0).unwrap(), seed).unwrap();
            let values: Vec<f64> = schedule.times().iter().map(|&t| (2.0 * PI * t).cos()).collect();
            let signal = SampledSignal::from_real(schedule, &values).unwrap();
            let train = to_impulse_train(&signal, t_base / 100.0).unwrap();
            let err = (train.pair_with(h).re - exact).abs();
            assert!(err <= 2.0 * t_base * t_base, "T={t_base} seed={seed}: {err}");
        }
    }
}

#[test]
fn bessel_j0_matches_trapezoid_quadrature() {
    // The integrand of (1/pi) int_0^pi cos(x sin theta) is smooth and periodic,
    // so the trapezoid rule with 1e5 panels is exact to rounding.
    let panels = 100_000;
    for x in [0.0, 0.5, 2.404825557695773, 10.0, 60.0] {
        let h = PI / panels as f64;
        let sum: f64 = (0..=panels)
            .map(|k| {
                let w = if k == 0 || k == panels { 0.5 } else { 1.0 };
                w * (x * (h * k as f64).sin()).cos()
            })
            .sum();
        let oracle = sum * h / PI;
        assert!((bessel_j0(x) - oracle).abs() < 1e-12, "x={x}: {} vs {oracle}", bessel_j0(x));
    }
}
