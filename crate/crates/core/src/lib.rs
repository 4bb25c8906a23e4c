//! Instantaneous-frequency recovery from uniform and nonuniform samples.
//!
//! Two routes are provided. The synchrosqueezing route turns samples into a
//! weighted impulse train, takes a modified STFT and squeezes it onto a
//! frequency grid ([`pipeline::synchrosqueeze_samples`]). The bandlimited
//! route fits a shifted-sinc series by weighted least squares and reads the
//! Hilbert-transform IF off its closed-form analytic extension
//! ([`bandlimited::hilbert_if_from_samples`]).

pub mod bandlimited;
pub mod edr;
pub mod error;
pub mod figures;
pub mod hilbert;
pub mod io;
pub mod lstsq;
pub mod metrics;
pub mod pipeline;
pub mod quadrature;
pub mod signals;
pub mod stft;
pub mod synchrosqueeze;

pub use bandlimited::{
    analytic_extension, evaluate, hilbert_if_from_samples, reconstruct, AnalyticTrace, Basis, ReconstructionResult,
};
pub use edr::RPeakRecord;
pub use error::{Error, Result};
pub use hilbert::{analytic_signal, hilbert_if, UniformSeries};
pub use pipeline::{synchrosqueeze_samples, SsConfig, SsOutput};
pub use signals::{
    add_noise, bessel_j0, sample, to_impulse_train, ComponentSpec, ImpulseTrain, Interval, SampledSignal,
    SamplingSchedule, SignalForm, SignalSpec,
};
pub use stft::{gaussian_window, modified_stft, stft_time_derivative, FreqGrid, TimeFreqMap, Window};
pub use synchrosqueeze::{
    bound_report, extract_if_set, if_information, squeeze, BoundReport, Comparison, IfSet, OmegaMap, SqueezeMap,
};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
