//! Synthetic AM-FM signals, sampling schedules and weighted impulse trains.
//!
//! A nonuniformly sampled signal `{f(t_n)}` is represented for the STFT as
//! the distribution `sum_n (t_{n+1} - t_n) f(t_n) delta(t - t_n)`, discretized
//! by snapping every impulse to the nearest point of a fine uniform grid and
//! zero-padding in between.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{invalid, Error, Result};

/// Shared real function of time.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const DERIVATIVE_STEP: f64 = 1e-5;
const VALIDATION_POINTS: usize = 2001;

fn time_tolerance(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end < start {
            return Err(invalid(format!("interval [{start}, {end}] is empty or not finite")));
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Membership with a relative slack of 1e-9 so that `n * T` grids land
    /// inside their nominal interval.
    pub fn contains(&self, t: f64) -> bool {
        let tol = time_tolerance(self.end.abs().max(self.start.abs()));
        t >= self.start - tol && t <= self.end + tol
    }

    /// The sub-interval that stays `margin` away from both ends.
    pub fn shrink(&self, margin: f64) -> Option<Interval> {
        let start = self.start + margin;
        let end = self.end - margin;
        (end >= start).then_some(Interval { start, end })
    }

    fn sample_points(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.length() / (count.max(2) - 1) as f64;
        (0..count.max(2)).map(move |i| self.start + step * i as f64)
    }
}

fn central_difference(f: &RealFn, t: f64) -> f64 {
    let h = DERIVATIVE_STEP * t.abs().max(1.0);
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// One intrinsic mode `A(t) e^{2 pi i phi(t)}` (or `A(t) cos(2 pi phi(t))`).
///
/// The phase is measured in cycles, so `phi'(t)` is the instantaneous
/// frequency in Hz. Derivative hooks are optional; missing ones fall back to
/// central differences.
#[derive(Clone)]
pub struct ComponentSpec {
    amplitude: RealFn,
    phase: RealFn,
    amplitude_derivative: Option<RealFn>,
    phase_derivative: Option<RealFn>,
    phase_second_derivative: Option<RealFn>,
}

impl fmt::Debug for ComponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentSpec")
            .field("amplitude(0)", &(self.amplitude)(0.0))
            .field("frequency(0)", &self.frequency(0.0))
            .finish()
    }
}

impl ComponentSpec {
    pub fn new(
        amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            amplitude: Arc::new(amplitude),
            phase: Arc::new(phase),
            amplitude_derivative: None,
            phase_derivative: None,
            phase_second_derivative: None,
        }
    }

    /// Constant-amplitude, constant-frequency tone.
    pub fn tone(amplitude: f64, frequency: f64) -> Self {
        Self::new(move |_| amplitude, move |t| frequency * t)
            .with_amplitude_derivative(|_| 0.0)
            .with_phase_derivative(move |_| frequency)
            .with_phase_second_derivative(|_| 0.0)
    }

    pub fn with_amplitude_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.amplitude_derivative = Some(Arc::new(f));
        self
    }

    pub fn with_phase_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.phase_derivative = Some(Arc::new(f));
        self
    }

    pub fn with_phase_second_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.phase_second_derivative = Some(Arc::new(f));
        self
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        (self.amplitude)(t)
    }

    pub fn phase(&self, t: f64) -> f64 {
        (self.phase)(t)
    }

    pub fn amplitude_derivative(&self, t: f64) -> f64 {
        match &self.amplitude_derivative {
            Some(f) => f(t),
            None => central_difference(&self.amplitude, t),
        }
    }

    /// `phi'(t)`: the ideal instantaneous frequency of this component.
    pub fn frequency(&self, t: f64) -> f64 {
        match &self.phase_derivative {
            Some(f) => f(t),
            None => central_difference(&self.phase, t),
        }
    }

    pub fn chirp_rate(&self, t: f64) -> f64 {
        match (&self.phase_second_derivative, &self.phase_derivative) {
            (Some(f), _) => f(t),
            (None, Some(d)) => central_difference(d, t),
            (None, None) => {
                let h = 1e-3 * t.abs().max(1.0);
                (self.phase(t + h) - 2.0 * self.phase(t) + self.phase(t - h)) / (h * h)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalForm {
    /// `sum_k A_k e^{2 pi i phi_k}`
    Complex,
    /// `sum_k A_k cos(2 pi phi_k)`
    Cosine,
}

/// Sup-norms of one component over the signal interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentNorms {
    pub amplitude: f64,
    pub frequency: f64,
    pub amplitude_derivative: f64,
    pub chirp_rate: f64,
}

/// A superposition of AM-FM components on a finite interval, or a bare
/// waveform with no known decomposition.
#[derive(Clone)]
pub struct SignalSpec {
    components: Vec<ComponentSpec>,
    waveform: Option<RealFn>,
    interval: Interval,
    form: SignalForm,
    separation: Option<f64>,
}

impl fmt::Debug for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignalSpec")
            .field("components", &self.components)
            .field("waveform", &self.waveform.is_some())
            .field("interval", &self.interval)
            .field("form", &self.form)
            .field("separation", &self.separation)
            .finish()
    }
}

impl SignalSpec {
    /// Builds a superposition, checking `A_k > 0` and `phi_k' > 0` on a dense
    /// grid of the interval.
    pub fn new(components: Vec<ComponentSpec>, interval: Interval, form: SignalForm) -> Result<Self> {
        for (k, c) in components.iter().enumerate() {
            for t in interval.sample_points(VALIDATION_POINTS) {
                if !(c.amplitude(t) > 0.0) {
                    return Err(Error::Validation(format!("component {k}: amplitude not positive at t={t}")));
                }
                if !(c.frequency(t) > 0.0) {
                    return Err(Error::Validation(format!("component {k}: frequency not positive at t={t}")));
                }
            }
        }
        Ok(Self { components, waveform: None, interval, form, separation: None })
    }

    /// An arbitrary real waveform. Such a signal has no ideal instantaneous
    /// frequencies.
    pub fn from_waveform(waveform: impl Fn(f64) -> f64 + Send + Sync + 'static, interval: Interval) -> Self {
        Self {
            components: Vec::new(),
            waveform: Some(Arc::new(waveform)),
            interval,
            form: SignalForm::Cosine,
            separation: None,
        }
    }

    /// Declares the component separation `d`. Consecutive components must
    /// satisfy `inf phi_k' - sup phi_{k-1}' > d` on the interval.
    pub fn with_separation(mut self, d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(invalid("separation must be positive"));
        }
        let norms = self.component_norms();
        for k in 1..self.components.len() {
            let inf_k = self
                .interval
                .sample_points(VALIDATION_POINTS)
                .map(|t| self.components[k].frequency(t))
                .fold(f64::INFINITY, f64::min);
            let gap = inf_k - norms[k - 1].frequency;
            if !(gap > d) {
                return Err(Error::Validation(format!(
                    "components {} and {k} are separated by {gap:.4}, not more than d={d}",
                    k - 1
                )));
            }
        }
        self.separation = Some(d);
        Ok(self)
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn form(&self) -> SignalForm {
        self.form
    }

    pub fn separation(&self) -> Option<f64> {
        self.separation
    }

    pub fn is_real(&self) -> bool {
        self.form == SignalForm::Cosine
    }

    pub fn value(&self, t: f64) -> Complex64 {
        if let Some(w) = &self.waveform {
            return Complex64::new(w(t), 0.0);
        }
        self.components
            .iter()
            .map(|c| {
                let a = c.amplitude(t);
                let arg = 2.0 * PI * c.phase(t);
                match self.form {
                    SignalForm::Complex => Complex64::from_polar(a, arg),
                    SignalForm::Cosine => Complex64::new(a * arg.cos(), 0.0),
                }
            })
            .sum()
    }

    /// The ideal instantaneous frequencies `{phi_k'(t)}`.
    pub fn ideal_frequencies(&self, t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.frequency(t)).collect()
    }

    /// Sup-norms by dense evaluation over the interval.
    pub fn component_norms(&self) -> Vec<ComponentNorms> {
        self.components
            .iter()
            .map(|c| {
                let mut n = ComponentNorms { amplitude: 0.0, frequency: 0.0, amplitude_derivative: 0.0, chirp_rate: 0.0 };
                for t in self.interval.sample_points(VALIDATION_POINTS) {
                    n.amplitude = n.amplitude.max(c.amplitude(t).abs());
                    n.frequency = n.frequency.max(c.frequency(t).abs());
                    n.amplitude_derivative = n.amplitude_derivative.max(c.amplitude_derivative(t).abs());
                    n.chirp_rate = n.chirp_rate.max(c.chirp_rate(t).abs());
                }
                n
            })
            .collect()
    }
}

/// Sampling times `t_n = T n + a_n` restricted to an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSchedule {
    base_interval: f64,
    offsets: Vec<f64>,
    times: Vec<f64>,
}

impl SamplingSchedule {
    pub fn uniform(base_interval: f64, interval: Interval) -> Result<Self> {
        Self::perturbed(base_interval, 0.0, interval, 0)
    }

    /// `t_n = T n + T' u_n` with `u_n ~ U[0, 1)` drawn in order of increasing
    /// `n` from a ChaCha8 generator seeded with `seed`.
    pub fn perturbed(base_interval: f64, max_offset: f64, interval: Interval, seed: u64) -> Result<Self> {
        if !(base_interval > 0.0 && base_interval.is_finite()) {
            return Err(invalid(format!("sampling interval T={base_interval} must be positive")));
        }
        if !(max_offset >= 0.0 && max_offset < base_interval) {
            return Err(invalid(format!("perturbation T'={max_offset} must lie in [0, T={base_interval})")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = ((interval.start - max_offset) / base_interval).floor() as i64;
        let last = (interval.end / base_interval).ceil() as i64;
        let mut offsets = Vec::new();
        let mut times = Vec::new();
        for n in first..=last {
            let u: f64 = rng.random();
            let a = max_offset * u;
            let t = base_interval * n as f64 + a;
            if interval.contains(t) {
                offsets.push(a);
                times.push(t);
            }
        }
        Ok(Self { base_interval, offsets, times })
    }

    /// Wraps measured times. `T` is the mean spacing and each offset is the
    /// deviation from the uniform lattice anchored at the first time.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Validation("no sample times".into()));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!("sample times not strictly increasing at index {}", k + 1)));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("non-finite sample time".into()));
        }
        let base_interval = if times.len() > 1 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            1.0
        };
        let anchor = (times[0] / base_interval).round();
        let offsets = times
            .iter()
            .enumerate()
            .map(|(k, t)| t - base_interval * (anchor + k as f64))
            .collect();
        Ok(Self { base_interval, offsets, times })
    }

    /// Wraps measured times taken on a lattice of known spacing `T`; offsets
    /// are measured from `T floor(t / T)`.
    pub fn with_base_interval(times: Vec<f64>, base_interval: f64) -> Result<Self> {
        if !(base_interval > 0.0 && base_interval.is_finite()) {
            return Err(invalid(format!("sampling interval T={base_interval} must be positive")));
        }
        let measured = Self::from_times(times)?;
        let offsets = measured
            .times
            .iter()
            .map(|&t| t - base_interval * (t / base_interval + 1e-9).floor())
            .collect();
        Ok(Self { base_interval, offsets, times: measured.times })
    }

    pub fn base_interval(&self) -> f64 {
        self.base_interval
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sup_n |a_n|`
    pub fn max_offset(&self) -> f64 {
        self.offsets.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Whether `sup |a_n| <= T^2`, the perturbation bound under which IF
    /// recovery is guaranteed.
    pub fn within_perturbation_bound(&self) -> bool {
        self.max_offset() <= self.base_interval * self.base_interval
    }

    pub fn span(&self) -> Option<Interval> {
        Some(Interval { start: *self.times.first()?, end: *self.times.last()? })
    }
}

/// Sample values paired with their schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    schedule: SamplingSchedule,
    values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(schedule: SamplingSchedule, values: Vec<Complex64>) -> Result<Self> {
        if schedule.len() != values.len() {
            return Err(Error::Validation(format!(
                "{} values for {} sample times",
                values.len(),
                schedule.len()
            )));
        }
        Ok(Self { schedule, values })
    }

    pub fn from_real(schedule: SamplingSchedule, values: &[f64]) -> Result<Self> {
        Self::new(schedule, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn schedule(&self) -> &SamplingSchedule {
        &self.schedule
    }

    pub fn times(&self) -> &[f64] {
        self.schedule.times()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn map_values(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self { schedule: self.schedule.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Evaluates `spec` at every scheduled time.
pub fn sample(spec: &SignalSpec, schedule: &SamplingSchedule) -> Result<SampledSignal> {
    if let Some(t) = schedule.times().iter().find(|&&t| !spec.interval().contains(t)) {
        return Err(invalid(format!("sample time {t} lies outside the signal interval")));
    }
    let values = schedule.times().iter().map(|&t| spec.value(t)).collect();
    SampledSignal::new(schedule.clone(), values)
}

/// Adds real Gaussian noise `N(0, sigma^2)` to every sample.
pub fn add_noise(signal: &SampledSignal, sigma: f64, seed: u64) -> Result<SampledSignal> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("noise deviation {sigma} must be non-negative")));
    }
    if sigma == 0.0 {
        return Ok(signal.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(signal.map_values(|v| v + normal.sample(&mut rng)))
}

/// Adds real noise drawn uniformly from `[-bound, bound]`.
pub fn add_bounded_noise(signal: &SampledSignal, bound: f64, seed: u64) -> Result<SampledSignal> {
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(invalid(format!("noise bound {bound} must be non-negative")));
    }
    if bound == 0.0 {
        return Ok(signal.clone());
    }
    let uniform = Uniform::new_inclusive(-bound, bound).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(signal.map_values(|v| v + uniform.sample(&mut rng)))
}

/// Weighted delta train on a fine uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseTrain {
    grid_dt: f64,
    grid_start: f64,
    base_interval: f64,
    weights: Vec<Complex64>,
    support: Vec<usize>,
}

impl ImpulseTrain {
    /// Deposits `weights[k]` at the grid point nearest `times[k]`. The grid
    /// starts at the first time rounded down to a multiple of `grid_dt`.
    /// Impulses that snap to the same grid point are summed.
    pub fn from_weighted(times: &[f64], weights: &[Complex64], grid_dt: f64, base_interval: f64) -> Result<Self> {
        if times.len() != weights.len() {
            return Err(Error::Validation("times and weights differ in length".into()));
        }
        if !(grid_dt > 0.0 && grid_dt.is_finite()) {
            return Err(invalid(format!("grid spacing {grid_dt} must be positive")));
        }
        if grid_dt > base_interval * (1.0 + 1e-12) {
            return Err(invalid(format!("grid spacing {grid_dt} exceeds the sampling interval {base_interval}")));
        }
        let Some(&first) = times.first() else {
            return Ok(Self { grid_dt, grid_start: 0.0, base_interval, weights: Vec::new(), support: Vec::new() });
        };
        let grid_start = (first / grid_dt).floor() * grid_dt;
        let index = |t: f64| ((t - grid_start) / grid_dt).round().max(0.0) as usize;
        let len = index(times[times.len() - 1]) + 1;
        let mut dense = vec![Complex64::new(0.0, 0.0); len];
        let mut support = Vec::with_capacity(times.len());
        for (&t, &w) in times.iter().zip(weights) {
            let i = index(t);
            dense[i] += w;
            if support.last() != Some(&i) {
                support.push(i);
            }
        }
        Ok(Self { grid_dt, grid_start, base_interval, weights: dense, support })
    }

    pub fn grid_dt(&self) -> f64 {
        self.grid_dt
    }

    pub fn grid_start(&self) -> f64 {
        self.grid_start
    }

    /// `T` of the originating schedule.
    pub fn base_interval(&self) -> f64 {
        self.base_interval
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn grid_len(&self) -> usize {
        self.weights.len()
    }

    pub fn grid_time(&self, index: usize) -> f64 {
        self.grid_start + self.grid_dt * index as f64
    }

    /// Grid indices carrying an impulse, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn impulses(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.support.iter().map(|&i| (i, self.weights[i]))
    }

    /// Grid times of the first and last impulse.
    pub fn span(&self) -> Option<Interval> {
        Some(Interval {
            start: self.grid_time(*self.support.first()?),
            end: self.grid_time(*self.support.last()?),
        })
    }

    pub fn total_mass(&self) -> Complex64 {
        self.impulses().map(|(_, w)| w).sum()
    }

    /// Pairs each impulse with a weight computed from its grid time.
    pub fn pair_with(&self, f: impl Fn(f64) -> f64) -> Complex64 {
        self.impulses().map(|(i, w)| w * f(self.grid_time(i))).sum()
    }
}

/// Converts samples to an impulse train using forward gaps: sample `n`
/// carries weight `(t_{n+1} - t_n) f(t_n)`, and the last sample uses `T`.
pub fn to_impulse_train(signal: &SampledSignal, grid_dt: f64) -> Result<ImpulseTrain> {
    let times = signal.times();
    let base = signal.schedule().base_interval();
    let weights: Vec<Complex64> = times
        .iter()
        .zip(signal.values())
        .enumerate()
        .map(|(n, (&t, &v))| {
            let gap = times.get(n + 1).map_or(base, |&next| next - t);
            v * gap
        })
        .collect();
    ImpulseTrain::from_weighted(times, &weights, grid_dt, base)
}

/// Bessel function of the first kind of order zero, from
/// `J0(x) = (1/pi) int_0^pi cos(x sin theta) d theta` by composite Simpson.
///
/// The integrand is analytic and `pi`-periodic, so the rule converges
/// geometrically once the panel count exceeds `|x|`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    let panels = 2 * (x.ceil() as usize + 32);
    simpson(|theta| (x * theta.sin()).cos(), 0.0, PI, panels) / PI
}

pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
