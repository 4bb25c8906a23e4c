//! The seven synthetic test signals and their sampling setups.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::signals::{
    add_noise, bessel_j0, sample, ComponentSpec, Interval, SampledSignal, SamplingSchedule, SignalForm, SignalSpec,
};

/// Seed offset separating the noise stream from the schedule stream.
const NOISE_STREAM: u64 = 0x6e6f_6973_65;

#[derive(Clone, Debug)]
pub struct Figure {
    pub id: u8,
    pub formula: &'static str,
    /// Formula of the ideal instantaneous frequencies, comma separated.
    pub truth_formula: &'static str,
    pub spec: SignalSpec,
    pub base_interval: f64,
    pub default_tprime: f64,
    /// Variance of additive Gaussian sample noise.
    pub noise_variance: f64,
    /// Threshold used for this figure when it differs from the default.
    pub gamma: Option<f64>,
}

impl Figure {
    pub fn interval(&self) -> Interval {
        self.spec.interval()
    }

    pub fn schedule(&self, tprime: f64, seed: u64) -> Result<SamplingSchedule> {
        SamplingSchedule::perturbed(self.base_interval, tprime, self.interval(), seed)
    }

    /// Samples on the figure's schedule, with its noise when it has any.
    pub fn samples(&self, tprime: f64, seed: u64) -> Result<SampledSignal> {
        let clean = sample(&self.spec, &self.schedule(tprime, seed)?)?;
        if self.noise_variance > 0.0 {
            add_noise(&clean, self.noise_variance.sqrt(), seed ^ NOISE_STREAM)
        } else {
            Ok(clean)
        }
    }

    /// Reference instantaneous frequencies at `t`. For the Bessel signal,
    /// which has no ideal IF, this is its asymptotic frequency 3.
    pub fn truth(&self, t: f64) -> Vec<f64> {
        if self.id == 3 {
            vec![3.0]
        } else {
            self.spec.ideal_frequencies(t)
        }
    }
}

fn interval() -> Interval {
    Interval { start: 0.0, end: 30.0 }
}

fn cosine(components: Vec<ComponentSpec>) -> SignalSpec {
    SignalSpec::new(components, interval(), SignalForm::Cosine).expect("figure components are valid")
}

pub const FIGURE_IDS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

pub fn figure(id: u8) -> Result<Figure> {
    let base = |formula, truth_formula, spec| Figure {
        id,
        formula,
        truth_formula,
        spec,
        base_interval: 0.1,
        default_tprime: 0.08,
        noise_variance: 0.0,
        gamma: None,
    };
    let fig = match id {
        1 => base(
            "(2+cos t)cos(2 pi(3t+cos t))",
            "3-sin t",
            cosine(vec![ComponentSpec::new(|t: f64| 2.0 + t.cos(), |t: f64| 3.0 * t + t.cos())
                .with_amplitude_derivative(|t: f64| -t.sin())
                .with_phase_derivative(|t: f64| 3.0 - t.sin())
                .with_phase_second_derivative(|t: f64| -t.cos())]),
        ),
        2 => base("cos(2 pi(t+0.05t^2))", "1+0.1t", cosine(vec![chirp(1.0, 0.05)])),
        3 => base(
            "J0(6 pi(t-10))",
            "3 (asymptotic)",
            SignalSpec::from_waveform(|t| bessel_j0(6.0 * PI * (t - 10.0)), interval()),
        ),
        4 => Figure {
            noise_variance: 0.4,
            ..base("cos(8 pi t)+N_t", "4", cosine(vec![ComponentSpec::tone(1.0, 4.0)]))
        },
        5 => Figure {
            base_interval: 0.25,
            default_tprime: 0.2,
            gamma: Some(6.0),
            ..base("cos(10 pi t)", "5", cosine(vec![ComponentSpec::tone(1.0, 5.0)]))
        },
        6 => base(
            "cos(2 pi(2t+0.2cos t))+cos(2 pi(3t+0.02t^2))",
            "2-0.2sin t, 3+0.04t",
            cosine(vec![
                ComponentSpec::new(|_| 1.0, |t: f64| 2.0 * t + 0.2 * t.cos())
                    .with_amplitude_derivative(|_| 0.0)
                    .with_phase_derivative(|t: f64| 2.0 - 0.2 * t.sin())
                    .with_phase_second_derivative(|t: f64| -0.2 * t.cos()),
                chirp(3.0, 0.02),
            ]),
        ),
        7 => base(
            "cos(5 pi t)+cos(2 pi(t+0.05t^2))",
            "2.5, 1+0.1t",
            cosine(vec![ComponentSpec::tone(1.0, 2.5), chirp(1.0, 0.05)]),
        ),
        other => return Err(invalid(format!("unknown figure {other} (expected 1 to 7)"))),
    };
    Ok(fig)
}

/// `cos(2 pi (f0 t + c t^2))`, IF `f0 + 2 c t`.
fn chirp(f0: f64, c: f64) -> ComponentSpec {
    ComponentSpec::new(|_| 1.0, move |t| f0 * t + c * t * t)
        .with_amplitude_derivative(|_| 0.0)
        .with_phase_derivative(move |t| f0 + 2.0 * c * t)
        .with_phase_second_derivative(move |_| 2.0 * c)
}

/// Mean of the two Fig. 6 IIF curves, `2.5 + 0.02t - 0.1 sin t`.
pub fn two_component_average(t: f64) -> f64 {
    2.5 + 0.02 * t - 0.1 * t.sin()
}
