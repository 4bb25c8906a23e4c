//! The synchrosqueezing chain from samples (or a prepared impulse train) to
//! IF sets, with the default parameters used throughout the crate.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::signals::{to_impulse_train, ImpulseTrain, Interval, SampledSignal};
use crate::stft::{default_time_grid, fft_freq_grid, gaussian_window, stft_with_derivative, StftMethod, TimeFreqMap, Window};
use crate::synchrosqueeze::{extract_if_set, if_information, squeeze_with, Comparison, IfSet, SqueezeMap, SqueezeParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SsConfig {
    pub window_scale: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Fine grid spacing; `T / 100` when unset.
    pub grid_dt: Option<f64>,
    /// Largest analysed frequency; `1 / T` when unset.
    pub eta_max: Option<f64>,
    pub support_floor: f64,
    pub comparison: Comparison,
}

impl Default for SsConfig {
    fn default() -> Self {
        Self {
            window_scale: 0.1,
            alpha: 0.1,
            gamma: 1e-8,
            grid_dt: None,
            eta_max: None,
            support_floor: 0.0,
            comparison: Comparison::Modulus,
        }
    }
}

/// Frequency step of the transform relative to `alpha`. Several cells per
/// bin keep the discrete measure close to the Lebesgue measure.
const CELLS_PER_BIN: f64 = 4.0;

impl SsConfig {
    pub fn resolved_grid_dt(&self, base_interval: f64) -> f64 {
        self.grid_dt.unwrap_or(base_interval / 100.0)
    }

    pub fn resolved_eta_max(&self, base_interval: f64) -> f64 {
        self.eta_max.unwrap_or(1.0 / base_interval)
    }

    pub fn window(&self) -> Result<Window> {
        gaussian_window(self.window_scale)
    }
}

#[derive(Clone, Debug)]
pub struct SsOutput {
    pub window: Window,
    pub grid_dt: f64,
    pub eta_max: f64,
    pub transform: TimeFreqMap,
    pub squeeze: SqueezeMap,
    pub set: IfSet,
}

impl SsOutput {
    /// Times at least one window radius away from both ends of `span`.
    pub fn interior(&self, span: Interval) -> Option<Interval> {
        span.shrink(self.window.effective_radius())
    }
}

pub fn synchrosqueeze_samples(signal: &SampledSignal, config: &SsConfig) -> Result<SsOutput> {
    if signal.is_empty() {
        return Err(invalid("no samples"));
    }
    let base = signal.schedule().base_interval();
    let train = to_impulse_train(signal, config.resolved_grid_dt(base))?;
    synchrosqueeze_train(&train, config)
}

/// Runs the chain on the default time grid, one column per base interval.
pub fn synchrosqueeze_train(train: &ImpulseTrain, config: &SsConfig) -> Result<SsOutput> {
    synchrosqueeze_train_on(train, config, &default_time_grid(train))
}

pub fn synchrosqueeze_train_on(train: &ImpulseTrain, config: &SsConfig, times: &[f64]) -> Result<SsOutput> {
    let base = train.base_interval();
    let eta_max = config.resolved_eta_max(base);
    let window = config.window()?;
    let freqs = fft_freq_grid(train, &window, eta_max, Some(config.alpha / CELLS_PER_BIN))?;
    let (v, dv) = stft_with_derivative(train, &window, times, &freqs, StftMethod::Auto)?;
    let omega = if_information(&v, &dv, config.gamma)?;
    let params = SqueezeParams { alpha: config.alpha, gamma: config.gamma, eta_max, comparison: config.comparison };
    let squeeze = squeeze_with(&omega, &v, &params)?;
    let set = extract_if_set(&squeeze, config.support_floor);
    Ok(SsOutput { window, grid_dt: train.grid_dt(), eta_max, transform: v, squeeze, set })
}
