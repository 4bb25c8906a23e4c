//! Shared inputs for the benchmarks in `benches/`.

use ifsq_core::figures::figure;
use ifsq_core::{to_impulse_train, ImpulseTrain, Result, SampledSignal};

/// Figure 2 chirp samples on the perturbed schedule.
pub fn chirp_samples(tprime: f64) -> Result<SampledSignal> {
    figure(2)?.samples(tprime, 1)
}

/// The chirp as an impulse train at the default fine spacing `T / 100`.
pub fn chirp_train(tprime: f64) -> Result<ImpulseTrain> {
    let samples = chirp_samples(tprime)?;
    to_impulse_train(&samples, samples.schedule().base_interval() / 100.0)
}
