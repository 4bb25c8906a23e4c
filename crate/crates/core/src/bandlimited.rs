//! Weighted least-squares reconstruction of a bandlimited signal from
//! nonuniform samples, and the closed-form analytic extension of the result.
//!
//! Time is normalized by the base interval: the basis is `sinc(s - n - M)`
//! with `s = tau / T`, so `evaluate` takes physical time `tau`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstsq::{self, Matrix};
use crate::signals::SampledSignal;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Sinc,
    Dft,
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinc" => Ok(Basis::Sinc),
            "dft" => Ok(Basis::Dft),
            other => Err(Error::InvalidParameter(format!("unknown basis '{other}' (expected sinc or dft)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    /// `coefficients[i]` multiplies basis index `n = i - N`.
    pub coefficients: Vec<Complex64>,
    pub order: usize,
    pub centering: i64,
    pub base_interval: f64,
    pub residual: f64,
    pub basis: Basis,
    pub rank: usize,
}

impl ReconstructionResult {
    pub fn basis_size(&self) -> usize {
        2 * self.order + 1
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank < self.basis_size()
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        self.coefficients[(n + self.order as i64) as usize]
    }
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `(t_{k+1} - t_{k-1}) / 2`, with the single available gap at either end.
pub fn sample_weights(times: &[f64], base_interval: f64) -> Vec<f64> {
    let len = times.len();
    match len {
        0 => Vec::new(),
        1 => vec![base_interval],
        _ => (0..len)
            .map(|k| match k {
                0 => times[1] - times[0],
                k if k == len - 1 => times[k] - times[k - 1],
                k => 0.5 * (times[k + 1] - times[k - 1]),
            })
            .collect(),
    }
}

/// `M = floor((J1 + J2) / (2T))` for the first and last sample times.
pub fn centering(times: &[f64], base_interval: f64) -> i64 {
    match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => ((a + b) / (2.0 * base_interval)).floor() as i64,
        _ => 0,
    }
}

/// `ceil((J2 - J1) / (2T))`, reduced so the system stays determined.
pub fn default_order(signal: &SampledSignal) -> usize {
    let times = signal.times();
    if times.len() < 2 {
        return 0;
    }
    let t = signal.schedule().base_interval();
    let cover = ((times[times.len() - 1] - times[0]) / (2.0 * t) - 1e-9).ceil().max(0.0) as usize;
    cover.min((times.len() - 1) / 2)
}

fn basis_value(basis: Basis, n: i64, order: usize, centering: i64, s: f64) -> Complex64 {
    match basis {
        Basis::Sinc => Complex64::new(sinc(s - n as f64 - centering as f64), 0.0),
        Basis::Dft => {
            let len = (2 * order + 1) as f64;
            Complex64::from_polar(1.0 / len.sqrt(), -2.0 * PI * n as f64 * s / len)
        }
    }
}

fn design_matrix(times: &[f64], weights: &[f64], base: f64, order: usize, m: i64, basis: Basis) -> Matrix {
    let n_order = order as i64;
    Matrix::from_fn(times.len(), 2 * order + 1, |k, i| {
        weights[k] * basis_value(basis, i as i64 - n_order, order, m, times[k] / base)
    })
}

/// Weighted l2 misfit `|w (f - A c)|` of the given coefficients.
pub fn weighted_misfit(signal: &SampledSignal, result: &ReconstructionResult) -> f64 {
    let base = result.base_interval;
    let weights = sample_weights(signal.times(), base);
    signal
        .times()
        .iter()
        .zip(signal.values())
        .zip(&weights)
        .map(|((&t, &f), &w)| (w * (f - evaluate_complex(result, t))).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn reconstruct(signal: &SampledSignal, order: usize, basis: Basis) -> Result<ReconstructionResult> {
    reconstruct_with_rcond(signal, order, basis, None)
}

/// As [`reconstruct`], with an explicit relative rank cutoff for the solver.
pub fn reconstruct_with_rcond(
    signal: &SampledSignal,
    order: usize,
    basis: Basis,
    rcond: Option<f64>,
) -> Result<ReconstructionResult> {
    let unknowns = 2 * order + 1;
    if signal.len() < unknowns {
        return Err(Error::Underdetermined { samples: signal.len(), unknowns });
    }
    let times = signal.times();
    let base = signal.schedule().base_interval();
    let weights = sample_weights(times, base);
    let m = centering(times, base);
    let a = design_matrix(times, &weights, base, order, m, basis);
    let b: Vec<Complex64> = signal.values().iter().zip(&weights).map(|(f, w)| f * w).collect();
    let rcond = rcond.unwrap_or_else(|| lstsq::default_rcond(a.rows(), a.cols()));
    let sol = lstsq::solve(&a, &b, rcond)?;
    let fitted = a.mul_vec(&sol.x);
    let residual = fitted.iter().zip(&b).map(|(f, b)| (b - f).norm_sqr()).sum::<f64>().sqrt();
    Ok(ReconstructionResult {
        coefficients: sol.x,
        order,
        centering: m,
        base_interval: base,
        residual,
        basis,
        rank: sol.rank,
    })
}

/// `f_N(tau / T)`, the reconstruction at physical time `tau`.
pub fn evaluate_complex(result: &ReconstructionResult, tau: f64) -> Complex64 {
    let s = tau / result.base_interval;
    let n_order = result.order as i64;
    result
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, &c)| c * basis_value(result.basis, i as i64 - n_order, result.order, result.centering, s))
        .sum()
}

/// Real part of [`evaluate_complex`].
pub fn evaluate(result: &ReconstructionResult, tau: f64) -> f64 {
    evaluate_complex(result, tau).re
}

/// Below this `|s|` the derivative kernel switches to its Taylor series.
const SERIES_CROSSOVER: f64 = 1e-4;

/// `P+ sinc(s) = (1/2) sinc(s/2) e^{i pi s / 2}`.
pub fn analytic_kernel(s: f64) -> Complex64 {
    0.5 * sinc(0.5 * s) * Complex64::from_polar(1.0, 0.5 * PI * s)
}

/// `d/ds P+ sinc(s) = ((i + pi s) e^{i pi s} - i) / (2 pi s^2)`.
pub fn analytic_kernel_derivative(s: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if s.abs() < SERIES_CROSSOVER {
        // int_0^{1/2} 2 pi i xi e^{2 pi i xi s} d xi expanded in s.
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(0.0, 2.0 * PI); // (2 pi i)^{k+1} s^k / k!
        for k in 0..6 {
            sum += term / ((k + 2) as f64 * 2f64.powi(k + 2));
            term *= Complex64::new(0.0, 2.0 * PI) * s / (k + 1) as f64;
        }
        return sum;
    }
    ((i + PI * s) * Complex64::from_polar(1.0, PI * s) - i) / (2.0 * PI * s * s)
}

/// Analytic extension and Hilbert-transform IF sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticTrace {
    pub times: Vec<f64>,
    pub analytic: Vec<Complex64>,
    /// Derivative with respect to physical time.
    pub analytic_derivative: Vec<Complex64>,
    /// `None` where `|analytic|` is at or below the floor.
    pub if_h: Vec<Option<f64>>,
}

impl AnalyticTrace {
    pub fn defined_count(&self) -> usize {
        self.if_h.iter().filter(|v| v.is_some()).count()
    }
}

/// Relative floor on `|P+ f|` below which IF_H is left undefined.
pub const ANALYTIC_FLOOR: f64 = 1e-6;

/// `(1/2 pi) Im(z' / z)` wherever `|z| > floor * max |z|`.
pub fn instantaneous_frequency(z: &[Complex64], dz: &[Complex64], floor: f64) -> Vec<Option<f64>> {
    let peak = z.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    z.iter()
        .zip(dz)
        .map(|(&z, &dz)| (peak > 0.0 && z.norm() > floor * peak).then(|| (dz / z).im / (2.0 * PI)))
        .collect()
}

pub fn analytic_extension(result: &ReconstructionResult, times: &[f64]) -> Result<AnalyticTrace> {
    if result.basis != Basis::Sinc {
        return Err(Error::UnsupportedBasis);
    }
    let base = result.base_interval;
    let shift = result.centering as f64 - result.order as f64;
    let pairs: Vec<(Complex64, Complex64)> = times
        .par_iter()
        .map(|&tau| {
            let s0 = tau / base - shift;
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for (i, &c) in result.coefficients.iter().enumerate() {
                let s = s0 - i as f64;
                p += c * analytic_kernel(s);
                dp += c * analytic_kernel_derivative(s);
            }
            (p, dp / base)
        })
        .collect();
    let (analytic, analytic_derivative): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let if_h = instantaneous_frequency(&analytic, &analytic_derivative, ANALYTIC_FLOOR);
    Ok(AnalyticTrace { times: times.to_vec(), analytic, analytic_derivative, if_h })
}

/// Reconstruct in the sinc basis, then take the analytic extension. `order`
/// defaults to [`default_order`].
pub fn hilbert_if_from_samples(
    signal: &SampledSignal,
    order: Option<usize>,
    times: &[f64],
) -> Result<(ReconstructionResult, AnalyticTrace)> {
    let order = order.unwrap_or_else(|| default_order(signal));
    let result = reconstruct(signal, order, Basis::Sinc)?;
    let trace = analytic_extension(&result, times)?;
    Ok((result, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{Interval, SamplingSchedule};

    fn uniform(t: f64, end: f64, f: impl Fn(f64) -> f64) -> SampledSignal {
        let schedule = SamplingSchedule::uniform(t, Interval::new(0.0, end).unwrap()).unwrap();
        let values: Vec<f64> = schedule.times().iter().map(|&x| f(x)).collect();
        SampledSignal::from_real(schedule, &values).unwrap()
    }

    #[test]
    fn weights_and_centering() {
        let w = sample_weights(&[0.0, 0.1, 0.3, 0.4], 0.1);
        let expect = [0.1, 0.15, 0.15, 0.1];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(centering(&[0.0, 30.0], 0.1), 150);
        assert_eq!(centering(&[0.05, 30.0], 0.1), 150);
    }

    #[test]
    fn in_span_sinc_recovered() {
        let base = 0.1;
        let end = 3.0;
        let m = 15;
        let sig = uniform(base, end, |t| sinc(t / base - 5.0 - m as f64));
        let r = reconstruct(&sig, 10, Basis::Sinc).unwrap();
        assert_eq!(r.centering, m);
        assert!(r.residual < 1e-10);
        for n in -10..=10 {
            let want = if n == 5 { 1.0 } else { 0.0 };
            assert!((r.coefficient(n) - want).norm() < 1e-10, "n={n}");
        }
        assert!((evaluate(&r, base * (5.0 + m as f64)) - 1.0).abs() < 1e-10);
        assert!(evaluate(&r, base * (6.0 + m as f64)).abs() < 1e-10);
    }

    #[test]
    fn zero_samples_zero_coefficients() {
        let sig = uniform(0.1, 2.0, |_| 0.0);
        let r = reconstruct(&sig, 5, Basis::Sinc).unwrap();
        assert!(r.coefficients.iter().all(|c| c.norm() == 0.0));
        assert_eq!(r.residual, 0.0);
        let trace = analytic_extension(&r, &[0.5, 1.0]).unwrap();
        assert_eq!(trace.defined_count(), 0);
    }

    #[test]
    fn underdetermined_rejected() {
        let sig = uniform(0.1, 0.5, |t| t);
        assert!(matches!(reconstruct(&sig, 5, Basis::Sinc), Err(Error::Underdetermined { samples: 6, unknowns: 11 })));
    }

    #[test]
    fn dft_basis_has_no_analytic_extension() {
        let sig = uniform(0.1, 2.0, |t| (2.0 * PI * t).cos());
        let r = reconstruct(&sig, 5, Basis::Dft).unwrap();
        assert!(matches!(analytic_extension(&r, &[1.0]), Err(Error::UnsupportedBasis)));
    }

    #[test]
    fn kernel_derivative_series_matches_closed_form() {
        for s in [1.2e-4, 2e-4, 5e-4] {
            let a = analytic_kernel_derivative(s);
            let h = 1e-6;
            let fd = (analytic_kernel(s + h) - analytic_kernel(s - h)) / (2.0 * h);
            assert!((a - fd).norm() < 1e-8);
        }
        let at_zero = analytic_kernel_derivative(0.0);
        assert!((at_zero - Complex64::new(0.0, PI / 4.0)).norm() < 1e-15);
        let left = analytic_kernel_derivative(0.99e-4);
        let right = analytic_kernel_derivative(1.01e-4);
        assert!((left - right).norm() < 1e-5);
    }

    #[test]
    fn residual_matches_recomputed_misfit() {
        let sig = uniform(0.1, 4.0, |t| (2.0 * PI * 1.3 * t).cos() + 0.3 * t);
        let r = reconstruct(&sig, 12, Basis::Sinc).unwrap();
        let again = weighted_misfit(&sig, &r);
        assert!((again - r.residual).abs() <= 1e-12 * r.residual.max(1e-300) + 1e-15);
    }
}
