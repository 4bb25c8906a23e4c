//! Modified short-time Fourier transform of impulse trains.
//!
//! ```text
//! V_g f(t, eta) = sum_n w_n g(tau_n - t) e^{-2 pi i eta (tau_n - t)}
//! ```
//!
//! where `tau_n` are the grid points carrying impulse weight `w_n`. This is
//! the ordinary STFT with an extra modulation `e^{2 pi i eta t}`, which makes
//! `d/dt V_g f = -V_{g'} f + 2 pi i eta V_g f`.
//!
//! Two evaluation paths exist. The direct path sums over the impulses inside
//! the window for every frequency. The FFT path scatters the windowed
//! impulses of one column into a zero-padded buffer indexed by grid offset
//! and transforms it; it requires the frequency spacing to be
//! `1 / (grid_dt * N)` for an FFT length `N` covering the window support.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::signals::ImpulseTrain;

/// `ln(1e12)`: the Gaussian is truncated where it falls below 1e-12.
const TRUNCATION_EXPONENT: f64 = 28.0;
const PHASE_RESYNC: usize = 128;

/// Analysis window with closed-form derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// `g(u) = exp(-scale * pi * u^2)`
    Gaussian { scale: f64 },
}

pub fn gaussian_window(scale: f64) -> Result<Window> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("window scale {scale} must be positive")));
    }
    Ok(Window::Gaussian { scale })
}

impl Window {
    pub fn evaluate(&self, u: f64) -> f64 {
        match *self {
            Window::Gaussian { scale } => (-scale * PI * u * u).exp(),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Window::Gaussian { scale } => -2.0 * scale * PI * u * self.evaluate(u),
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        match *self {
            Window::Gaussian { scale } => {
                let b = scale * PI;
                (4.0 * b * b * u * u - 2.0 * b) * self.evaluate(u)
            }
        }
    }

    /// Derivative of order `m` (0, 1 or 2).
    pub fn derivative_of_order(&self, m: usize, u: f64) -> f64 {
        match m {
            0 => self.evaluate(u),
            1 => self.derivative(u),
            2 => self.second_derivative(u),
            _ => panic!("window derivatives above order 2 are not provided"),
        }
    }

    /// Radius beyond which `|g| < 1e-12`; sums are truncated there.
    pub fn effective_radius(&self) -> f64 {
        match *self {
            Window::Gaussian { scale } => (TRUNCATION_EXPONENT / (scale * PI)).sqrt(),
        }
    }

    /// Scale on which `|g^|` decays; plays the role of `d/2`.
    pub fn nominal_bandwidth(&self) -> f64 {
        match *self {
            Window::Gaussian { scale } => scale.sqrt(),
        }
    }

    /// Fourier transform `g^(xi)`.
    pub fn spectrum(&self, xi: f64) -> f64 {
        match *self {
            Window::Gaussian { scale } => (-PI * xi * xi / scale).exp() / scale.sqrt(),
        }
    }
}

/// Uniform frequency grid `eta_j = j * step`, `j = 0..len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreqGrid {
    pub step: f64,
    pub len: usize,
}

impl FreqGrid {
    pub fn new(step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || len == 0 {
            return Err(invalid("frequency grid needs a positive step and at least one point"));
        }
        Ok(Self { step, len })
    }

    /// All multiples of `step` in `[0, eta_max]`.
    pub fn up_to(step: f64, eta_max: f64) -> Result<Self> {
        if !(eta_max >= 0.0) {
            return Err(invalid(format!("maximum frequency {eta_max} must be non-negative")));
        }
        Self::new(step, (eta_max / step + 1e-9).floor() as usize + 1)
    }

    pub fn freq(&self, j: usize) -> f64 {
        self.step * j as f64
    }

    pub fn max(&self) -> f64 {
        self.freq(self.len - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.freq(j))
    }
}

/// Complex values on a time x frequency grid, stored row-major by time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFreqMap {
    pub times: Vec<f64>,
    pub freqs: FreqGrid,
    pub values: Vec<Complex64>,
}

impl TimeFreqMap {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_freqs(&self) -> usize {
        self.freqs.len
    }

    pub fn get(&self, m: usize, j: usize) -> Complex64 {
        self.values[m * self.freqs.len + j]
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.freqs.len..(m + 1) * self.freqs.len]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    pub fn same_grid(&self, other: &TimeFreqMap) -> bool {
        self.times == other.times && self.freqs == other.freqs
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StftMethod {
    /// FFT when the grid allows it and it is cheaper.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Highest frequency the fine grid resolves: its Nyquist frequency.
pub fn frequency_limit(train: &ImpulseTrain) -> f64 {
    0.5 / train.grid_dt()
}

/// One time per base interval `T` across the train, snapped to the grid.
pub fn default_time_grid(train: &ImpulseTrain) -> Vec<f64> {
    let Some(span) = train.span() else { return Vec::new() };
    let step = train.base_interval();
    let count = ((span.end - span.start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|m| {
            let t = span.start + step * m as f64;
            train.grid_time(((t - train.grid_start()) / train.grid_dt()).round() as usize)
        })
        .collect()
}

fn window_half_width(train: &ImpulseTrain, window: &Window) -> usize {
    (window.effective_radius() / train.grid_dt()).ceil() as usize + 1
}

/// FFT length and frequency grid for the FFT path: the transform covers the
/// window support and yields a spacing no coarser than `max_step` when given.
pub fn fft_freq_grid(train: &ImpulseTrain, window: &Window, eta_max: f64, max_step: Option<f64>) -> Result<FreqGrid> {
    let support = 2 * window_half_width(train, window) + 1;
    let wanted = max_step.map_or(0, |s| (1.0 / (train.grid_dt() * s)).ceil() as usize);
    let n = support.max(wanted).next_power_of_two();
    FreqGrid::up_to(1.0 / (train.grid_dt() * n as f64), eta_max)
}

fn fft_len_for(train: &ImpulseTrain, window: &Window, freqs: &FreqGrid) -> Option<usize> {
    let n = 1.0 / (train.grid_dt() * freqs.step);
    let rounded = n.round();
    let fits = (n - rounded).abs() < 1e-6 * rounded
        && rounded as usize >= 2 * window_half_width(train, window) + 1
        && freqs.len <= rounded as usize;
    fits.then_some(rounded as usize)
}

/// Impulse support indices inside `|tau - t| <= radius`.
fn window_range(train: &ImpulseTrain, t: f64, radius: f64) -> &[usize] {
    let support = train.support();
    let lo = support.partition_point(|&i| train.grid_time(i) < t - radius);
    let hi = support.partition_point(|&i| train.grid_time(i) <= t + radius);
    &support[lo..hi]
}

fn validate(train: &ImpulseTrain, times: &[f64], freqs: &FreqGrid) -> Result<()> {
    let limit = frequency_limit(train);
    if freqs.max() > limit * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "frequency {} exceeds the grid limit {limit} (grid spacing {})",
            freqs.max(),
            train.grid_dt()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("non-finite time in the time grid"));
    }
    Ok(())
}

struct Evaluator<'a> {
    train: &'a ImpulseTrain,
    window: Window,
    freqs: FreqGrid,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl<'a> Evaluator<'a> {
    fn new(train: &'a ImpulseTrain, window: &Window, times: &[f64], freqs: &FreqGrid, method: StftMethod) -> Result<Self> {
        validate(train, times, freqs)?;
        let fft_len = fft_len_for(train, window, freqs);
        let use_fft = match method {
            StftMethod::Direct => false,
            StftMethod::Fft => {
                if fft_len.is_none() {
                    return Err(invalid(
                        "frequency grid is not an FFT grid for this train and window; use fft_freq_grid",
                    ));
                }
                true
            }
            StftMethod::Auto => fft_len.is_some_and(|n| {
                let per_window = 2.0 * window.effective_radius() / train.base_interval();
                let direct = per_window * freqs.len as f64;
                let fast = 5.0 * n as f64 * (n as f64).log2();
                fast < direct
            }),
        };
        let fft = use_fft.then(|| FftPlanner::new().plan_fft_forward(fft_len.unwrap_or(1)));
        Ok(Self { train, window: *window, freqs: *freqs, fft })
    }

    /// Evaluates one column for every requested window derivative order.
    fn column(&self, t: f64, orders: &[usize], out: &mut [Vec<Complex64>]) {
        match &self.fft {
            Some(fft) => self.column_fft(fft.as_ref(), t, orders, out),
            None => self.column_direct(t, orders, out),
        }
    }

    fn column_direct(&self, t: f64, orders: &[usize], out: &mut [Vec<Complex64>]) {
        let train = self.train;
        for (slot, &m) in out.iter_mut().zip(orders) {
            slot.clear();
            slot.resize(self.freqs.len, Complex64::new(0.0, 0.0));
            for &i in window_range(train, t, self.window.effective_radius()) {
                let x = train.grid_time(i) - t;
                let gw = train.weights()[i] * self.window.derivative_of_order(m, x);
                let omega = -2.0 * PI * self.freqs.step * x;
                let step = Complex64::cis(omega);
                let mut phase = Complex64::new(1.0, 0.0);
                for (j, acc) in slot.iter_mut().enumerate() {
                    if j % PHASE_RESYNC == 0 {
                        phase = Complex64::cis(omega * j as f64);
                    }
                    *acc += gw * phase;
                    phase *= step;
                }
            }
        }
    }

    fn column_fft(&self, fft: &dyn Fft<f64>, t: f64, orders: &[usize], out: &mut [Vec<Complex64>]) {
        let train = self.train;
        let n = fft.len();
        let dt = train.grid_dt();
        let center = ((t - train.grid_start()) / dt).round() as i64;
        let delta = t - (train.grid_start() + dt * center as f64);
        let range = window_range(train, t, self.window.effective_radius());
        let mut buffer = vec![Complex64::new(0.0, 0.0); n];
        for (slot, &m) in out.iter_mut().zip(orders) {
            buffer.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for &i in range {
                let k = i as i64 - center;
                let x = dt * k as f64 - delta;
                buffer[k.rem_euclid(n as i64) as usize] += train.weights()[i] * self.window.derivative_of_order(m, x);
            }
            fft.process(&mut buffer);
            slot.clear();
            slot.extend(
                buffer[..self.freqs.len]
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| b * Complex64::cis(2.0 * PI * self.freqs.freq(j) * delta)),
            );
        }
    }

    fn run(&self, times: &[f64], orders: &[usize]) -> Vec<Vec<Complex64>> {
        let columns: Vec<Vec<Vec<Complex64>>> = times
            .par_iter()
            .map(|&t| {
                let mut out = vec![Vec::new(); orders.len()];
                self.column(t, orders, &mut out);
                out
            })
            .collect();
        let mut maps = vec![Vec::with_capacity(times.len() * self.freqs.len); orders.len()];
        for column in columns {
            for (map, values) in maps.iter_mut().zip(column) {
                map.extend(values);
            }
        }
        maps
    }
}

pub fn modified_stft(train: &ImpulseTrain, window: &Window, times: &[f64], freqs: &FreqGrid) -> Result<TimeFreqMap> {
    modified_stft_with(train, window, times, freqs, StftMethod::Auto)
}

pub fn modified_stft_with(
    train: &ImpulseTrain,
    window: &Window,
    times: &[f64],
    freqs: &FreqGrid,
    method: StftMethod,
) -> Result<TimeFreqMap> {
    let eval = Evaluator::new(train, window, times, freqs, method)?;
    let values = eval.run(times, &[0]).pop().unwrap_or_default();
    Ok(TimeFreqMap { times: times.to_vec(), freqs: *freqs, values })
}

/// `d/dt V_g f(t, eta) = -V_{g'} f(t, eta) + 2 pi i eta V_g f(t, eta)`.
pub fn stft_time_derivative(train: &ImpulseTrain, window: &Window, times: &[f64], freqs: &FreqGrid) -> Result<TimeFreqMap> {
    Ok(stft_with_derivative(train, window, times, freqs, StftMethod::Auto)?.1)
}

/// The transform and its time derivative from one pass over the columns.
pub fn stft_with_derivative(
    train: &ImpulseTrain,
    window: &Window,
    times: &[f64],
    freqs: &FreqGrid,
    method: StftMethod,
) -> Result<(TimeFreqMap, TimeFreqMap)> {
    let eval = Evaluator::new(train, window, times, freqs, method)?;
    let mut maps = eval.run(times, &[0, 1]);
    let vg_prime = maps.pop().unwrap_or_default();
    let v = maps.pop().unwrap_or_default();
    let nf = freqs.len;
    let dv = v
        .iter()
        .zip(&vg_prime)
        .enumerate()
        .map(|(idx, (&v, &vp))| {
            let eta = freqs.freq(idx % nf);
            -vp + Complex64::new(0.0, 2.0 * PI * eta) * v
        })
        .collect();
    let v = TimeFreqMap { times: times.to_vec(), freqs: *freqs, values: v };
    let dv = TimeFreqMap { times: times.to_vec(), freqs: *freqs, values: dv };
    Ok((v, dv))
}
