//! Squeezing and the window integrals against brute-force references.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifsq_core::synchrosqueeze::{squeeze_with, window_integral, SqueezeParams};
use ifsq_core::{gaussian_window, if_information, Comparison, FreqGrid, TimeFreqMap};

fn random_map(rng: &mut ChaCha8Rng, times: usize, freqs: FreqGrid, spread: f64) -> TimeFreqMap {
    let values = (0..times * freqs.len)
        .map(|_| Complex64::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread)))
        .collect();
    TimeFreqMap { times: (0..times).map(|m| m as f64).collect(), freqs, values }
}

/// Enumerates every (bin, cell) pair directly from the definition.
fn brute_force(v: &TimeFreqMap, dv: &TimeFreqMap, params: &SqueezeParams) -> Vec<Vec<f64>> {
    let SqueezeParams { alpha, gamma, eta_max, comparison } = *params;
    let n_xi = (eta_max / alpha - 1e-9).ceil() as usize + 1;
    let f = v.freqs;
    (0..v.times.len())
        .map(|m| {
            (0..n_xi)
                .map(|n| {
                    let xi = alpha * n as f64;
                    let mut total = 0.0;
                    for j in 0..f.len {
                        let eta = f.freq(j);
                        let x = v.get(m, j);
                        if eta > eta_max || x.norm() < gamma || x.norm() == 0.0 {
                            continue;
                        }
                        let omega = dv.get(m, j) / (Complex64::new(0.0, 2.0 * PI) * x);
                        let distance = match comparison {
                            Comparison::Modulus => (omega - xi).norm(),
                            Comparison::RealPart => (omega.re - xi).abs(),
                        };
                        if distance < alpha / 2.0 {
                            let lo = (eta - f.step / 2.0).max(0.0);
                            let hi = (eta + f.step / 2.0).min(eta_max);
                            total += (hi - lo).max(0.0);
                        }
                    }
                    total
                })
                .collect()
        })
        .collect()
}

#[test]
fn squeeze_equals_brute_force_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let freqs = FreqGrid::new(0.05, 50).unwrap();
        let v = random_map(&mut rng, 10, freqs, 1.0);
        // dv = 2 pi i v (eta + noise) puts omega near the cell frequencies.
        let dv = TimeFreqMap {
            values: v
                .values
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let eta = freqs.freq(k % freqs.len);
                    let jitter = Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.1));
                    Complex64::new(0.0, 2.0 * PI) * x * (eta + jitter)
                })
                .collect(),
            ..v.clone()
        };
        let comparison = if case % 2 == 0 { Comparison::Modulus } else { Comparison::RealPart };
        let params = SqueezeParams {
            alpha: [0.1, 0.25, 0.3][case % 3],
            gamma: [0.0, 0.3, 0.8][case % 3],
            eta_max: [2.45, 1.0, 3.0][case % 3],
            comparison,
        };
        let omega = if_information(&v, &dv, params.gamma).unwrap();
        let s = squeeze_with(&omega, &v, &params).unwrap();
        let oracle = brute_force(&v, &dv, &params);
        for (m, row) in oracle.iter().enumerate() {
            assert_eq!(s.row(m), row.as_slice(), "case {case}, time {m}");
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    (1..=order)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre over `[a, b]` with `panels` equal pieces.
fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(10);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + h * (p as f64 + 0.5);
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn window_integrals_match_gauss_legendre() {
    for scale in [1.0, 0.1, 0.37] {
        let window = gaussian_window(scale).unwrap();
        let r = window.effective_radius();
        // Break points: 0 for |u|^n and the zeros of g''.
        let z = (1.0 / (2.0 * scale * PI)).sqrt();
        let knots = [-r, -z, 0.0, z, r];
        for n in 0..3 {
            for m in 0..3 {
                let f = |u: f64| u.abs().powi(n as i32) * window.derivative_of_order(m, u).abs();
                let oracle: f64 = knots.windows(2).map(|k| composite(f, k[0], k[1], 200)).sum();
                let got = window_integral(&window, n, m);
                assert!((got - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "scale {scale} n {n} m {m}");
            }
        }
    }
}

#[test]
fn unit_gaussian_integrals() {
    let window = gaussian_window(1.0).unwrap();
    assert!((window_integral(&window, 0, 0) - 1.0).abs() <= 1e-8);
    assert!((window_integral(&window, 1, 0) - 1.0 / PI).abs() <= 1e-8);
    // int |g'| = 2 g(0).
    assert!((window_integral(&window, 0, 1) - 2.0).abs() <= 1e-8);
}
