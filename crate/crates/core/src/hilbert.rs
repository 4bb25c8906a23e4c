//! Analytic signal and Hilbert-transform IF of densely, uniformly sampled
//! series, computed with the FFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::bandlimited::ANALYTIC_FLOOR;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct UniformSeries {
    dt: f64,
    start: f64,
    values: Vec<f64>,
}

impl UniformSeries {
    pub fn new(dt: f64, start: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("spacing dt={dt} must be positive")));
        }
        if values.len() < 4 {
            return Err(invalid(format!("series needs at least 4 samples, got {}", values.len())));
        }
        Ok(Self { dt, start, values })
    }

    /// Accepts `(t, value)` samples whose spacing is uniform to `1e-9 * dt`.
    pub fn from_samples(times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid("times and values differ in length"));
        }
        if times.len() < 4 {
            return Err(invalid(format!("series needs at least 4 samples, got {}", times.len())));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (k, &t) in times.iter().enumerate() {
            let expected = times[0] + dt * k as f64;
            if (t - expected).abs() > 1e-9 * dt {
                return Err(crate::error::Error::Validation(format!(
                    "sample {k} at t={t} is off the uniform grid (expected {expected})"
                )));
            }
        }
        Self::new(dt, times[0], values.to_vec())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.start + self.dt * k as f64).collect()
    }
}

/// Multiplier applied to DFT bin `k` of a length-`n` sequence: 1 at DC and
/// at the even-length Nyquist bin, 2 on positive frequencies, 0 on negative.
pub fn half_band_multiplier(k: usize, n: usize) -> f64 {
    if k == 0 || (n % 2 == 0 && k == n / 2) {
        1.0
    } else if k < n.div_ceil(2) {
        2.0
    } else {
        0.0
    }
}

/// `f + i H f`, so a pure tone becomes a unit-modulus exponential.
pub fn analytic_signal(series: &UniformSeries) -> Vec<Complex64> {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= half_band_multiplier(k, n);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// IF_H of the series, `None` where `|P+ f|` is at or below the floor.
///
/// The phase derivative at interior points is `arg(z_{k+1} conj(z_{k-1})) /
/// (4 pi dt)`, the centered difference applied to the unwrapped phase, which
/// equals `Im(z'/z) / 2 pi` for the centered difference `z'` to leading order
/// and is exact for pure tones. Ends use one-sided differences.
pub fn hilbert_if(series: &UniformSeries) -> Vec<Option<f64>> {
    let z = analytic_signal(series);
    let n = z.len();
    let peak = z.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let floor = ANALYTIC_FLOOR * peak;
    let defined = |k: usize| peak > 0.0 && z[k].norm() > floor;
    let dt = series.dt;
    (0..n)
        .map(|k| {
            if !defined(k) {
                return None;
            }
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            if !(defined(lo) && defined(hi)) {
                return None;
            }
            let dphase = (z[hi] * z[lo].conj()).arg();
            Some(dphase / (2.0 * PI * dt * (hi - lo) as f64))
        })
        .collect()
}
