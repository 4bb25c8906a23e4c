//! ECG-derived respiration: R-peak amplitudes viewed as nonuniform samples of
//! a respiration-modulated envelope.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{hilbert_if, UniformSeries};
use crate::pipeline::{synchrosqueeze_train, synchrosqueeze_train_on, SsConfig, SsOutput};
use crate::signals::ImpulseTrain;
use crate::synchrosqueeze::IfSet;

#[derive(Clone, Debug, PartialEq)]
pub struct RPeakRecord {
    times: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl RPeakRecord {
    pub fn new(times: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if times.len() != amplitudes.len() {
            return Err(Error::Validation(format!("{} peak times for {} amplitudes", times.len(), amplitudes.len())));
        }
        if times.len() < 2 {
            return Err(Error::Validation("at least two R peaks are required".into()));
        }
        if let Some(k) = times.iter().chain(&amplitudes).position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite entry at position {k}")));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!("peak times not strictly increasing at index {}", k + 1)));
        }
        Ok(Self { times, amplitudes })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean spacing between consecutive peaks (seconds).
    pub fn mean_interval(&self) -> f64 {
        (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64
    }

    /// Peaks per second.
    pub fn mean_heart_rate(&self) -> f64 {
        1.0 / self.mean_interval()
    }

    /// Impulse train with backward-gap weights `(t_k - t_{k-1}) E(t_k)`; the
    /// first peak has no predecessor and uses the mean interval.
    pub fn impulse_train(&self, grid_dt: f64) -> Result<ImpulseTrain> {
        let mean = self.mean_interval();
        let weights: Vec<Complex64> = self
            .times
            .iter()
            .zip(&self.amplitudes)
            .enumerate()
            .map(|(k, (&t, &e))| {
                let gap = if k == 0 { mean } else { t - self.times[k - 1] };
                Complex64::new(gap * e, 0.0)
            })
            .collect();
        ImpulseTrain::from_weighted(&self.times, &weights, grid_dt, mean)
    }
}

/// Window scale and resolution used for EDR unless overridden: breathing
/// sits at a few tenths of a hertz, so the window is long and the bins fine.
pub fn default_edr_config() -> SsConfig {
    SsConfig { window_scale: 0.01, alpha: 0.02, ..SsConfig::default() }
}

/// Synthetic recording: peaks about once per second with small seeded
/// jitter, amplitudes `1 + depth cos(2 pi f_r t)`, and the respiration
/// channel `cos(2 pi f_r t)` sampled at `resp_rate` Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixtureParams {
    pub duration: f64,
    pub heart_interval: f64,
    pub jitter: f64,
    pub respiration_frequency: f64,
    pub modulation_depth: f64,
    pub resp_rate: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            duration: 480.0,
            heart_interval: 1.0,
            jitter: 0.05,
            respiration_frequency: 0.25,
            modulation_depth: 0.2,
            resp_rate: 64.0,
        }
    }
}

pub fn synthetic_fixture(params: &FixtureParams, seed: u64) -> Result<(RPeakRecord, UniformSeries)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fr = params.respiration_frequency;
    let mut times = Vec::new();
    let mut t = 0.5 * params.heart_interval;
    while t <= params.duration {
        times.push(t);
        let u: f64 = rng.random();
        t += params.heart_interval * (1.0 + params.jitter * (2.0 * u - 1.0));
    }
    let amplitudes = times.iter().map(|&t| 1.0 + params.modulation_depth * (2.0 * PI * fr * t).cos()).collect();
    let record = RPeakRecord::new(times, amplitudes)?;
    let dt = 1.0 / params.resp_rate;
    let n = (params.duration / dt).floor() as usize + 1;
    let resp = (0..n).map(|k| (2.0 * PI * fr * k as f64 * dt).cos()).collect();
    Ok((record, UniformSeries::new(dt, 0.0, resp)?))
}

#[derive(Clone, Debug)]
pub struct EdrOutput {
    pub rpeaks: SsOutput,
    pub respiration: Option<RespirationReference>,
}

/// IF of the recorded respiration channel on the R-peak time grid.
#[derive(Clone, Debug)]
pub struct RespirationReference {
    pub set: IfSet,
    pub if_h: Vec<Option<f64>>,
}

pub fn run_edr(record: &RPeakRecord, respiration: Option<&UniformSeries>, config: &SsConfig) -> Result<EdrOutput> {
    let grid_dt = config.resolved_grid_dt(record.mean_interval());
    let train = record.impulse_train(grid_dt)?;
    let rpeaks = synchrosqueeze_train(&train, config)?;
    let respiration = respiration.map(|series| respiration_reference(series, &rpeaks, config)).transpose()?;
    Ok(EdrOutput { rpeaks, respiration })
}

/// Squeezes the densely sampled channel with `T` equal to its own spacing,
/// over the same frequency range and times as the R-peak result.
fn respiration_reference(series: &UniformSeries, rpeaks: &SsOutput, config: &SsConfig) -> Result<RespirationReference> {
    let dt = series.dt();
    let times = series.times();
    let weights: Vec<Complex64> = series.values().iter().map(|&v| Complex64::new(dt * v, 0.0)).collect();
    let train = ImpulseTrain::from_weighted(&times, &weights, dt, dt)?;
    let dense = SsConfig { grid_dt: Some(dt), eta_max: Some(rpeaks.eta_max), ..*config };
    let at = &rpeaks.set.times;
    let set = synchrosqueeze_train_on(&train, &dense, at)?.set;
    let ifs = hilbert_if(series);
    let if_h = at
        .iter()
        .map(|&t| {
            let k = ((t - series.start()) / dt).round();
            (k >= 0.0 && (k as usize) < ifs.len()).then(|| ifs[k as usize]).flatten()
        })
        .collect();
    Ok(RespirationReference { set, if_h })
}
