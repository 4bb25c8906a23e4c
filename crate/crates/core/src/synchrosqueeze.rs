//! Instantaneous-frequency information, the STFT synchrosqueezing transform
//! and the support sets it induces.
//!
//! `omega(t, eta) = d_t V(t, eta) / (2 pi i V(t, eta))` reassigns every
//! time-frequency cell to a frequency estimate. The squeezed transform counts,
//! for each bin `xi = alpha * n`, the measure of frequencies `eta` whose
//! estimate lands within `alpha / 2` of `xi` while `|V| >= gamma`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature::adaptive_simpson;
use crate::signals::{SamplingSchedule, SignalSpec};
use crate::stft::{FreqGrid, TimeFreqMap, Window};

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaMap {
    pub times: Vec<f64>,
    pub freqs: FreqGrid,
    pub omega: Vec<Complex64>,
    pub valid: Vec<bool>,
}

impl OmegaMap {
    pub fn get(&self, m: usize, j: usize) -> Option<Complex64> {
        let idx = m * self.freqs.len + j;
        self.valid[idx].then_some(self.omega[idx])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Computes `omega` wherever `|V| >= gamma` and `V != 0`. Other entries are
/// marked invalid and hold zero.
pub fn if_information(v: &TimeFreqMap, dv: &TimeFreqMap, gamma: f64) -> Result<OmegaMap> {
    if !v.same_grid(dv) {
        return Err(invalid("transform and derivative grids differ"));
    }
    if !(gamma >= 0.0) {
        return Err(invalid(format!("threshold {gamma} must be non-negative")));
    }
    let mut omega = Vec::with_capacity(v.values.len());
    let mut valid = Vec::with_capacity(v.values.len());
    for (&x, &dx) in v.values.iter().zip(&dv.values) {
        let norm = x.norm();
        if norm >= gamma && norm > 0.0 {
            omega.push(dx / (Complex64::new(0.0, 2.0 * PI) * x));
            valid.push(true);
        } else {
            omega.push(Complex64::new(0.0, 0.0));
            valid.push(false);
        }
    }
    Ok(OmegaMap { times: v.times.clone(), freqs: v.freqs, omega, valid })
}

/// How `xi` is compared against the complex `omega`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|xi - omega| < alpha / 2` with the complex modulus.
    #[default]
    Modulus,
    /// `|xi - Re omega| < alpha / 2`.
    RealPart,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams {
    pub alpha: f64,
    pub gamma: f64,
    pub eta_max: f64,
    pub comparison: Comparison,
}

/// Non-negative squeezed mass on the `xi = alpha * n` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SqueezeMap {
    pub times: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub eta_max: f64,
    pub n_xi: usize,
    pub mass: Vec<f64>,
}

impl SqueezeMap {
    pub fn xi(&self, n: usize) -> f64 {
        self.alpha * n as f64
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.mass[m * self.n_xi..(m + 1) * self.n_xi]
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }
}

/// Measure of the frequency cell around `eta_j`, clipped to `[0, eta_max]`.
pub(crate) fn cell_measure(freqs: &FreqGrid, j: usize, eta_max: f64) -> f64 {
    let eta = freqs.freq(j);
    let lo = (eta - 0.5 * freqs.step).max(0.0);
    let hi = (eta + 0.5 * freqs.step).min(eta_max);
    (hi - lo).max(0.0)
}

/// Number of bins `xi = alpha * n` with `n = 0..=ceil(eta_max / alpha)`.
fn xi_count(alpha: f64, eta_max: f64) -> usize {
    (eta_max / alpha - 1e-9).ceil().max(0.0) as usize + 1
}

/// The bin whose `alpha / 2` neighbourhood contains `omega`, if any. The open
/// neighbourhoods of distinct bins are disjoint, so there is at most one.
fn bin_of(omega: Complex64, alpha: f64, n_xi: usize, comparison: Comparison) -> Option<usize> {
    let n = (omega.re / alpha).round();
    if !(n >= 0.0) || n as usize >= n_xi {
        return None;
    }
    let xi = alpha * n;
    let distance = match comparison {
        Comparison::Modulus => (Complex64::new(xi, 0.0) - omega).norm(),
        Comparison::RealPart => (xi - omega.re).abs(),
    };
    (distance < 0.5 * alpha).then_some(n as usize)
}

pub fn squeeze(omega: &OmegaMap, v: &TimeFreqMap, alpha: f64, gamma: f64, eta_max: f64) -> Result<SqueezeMap> {
    squeeze_with(omega, v, &SqueezeParams { alpha, gamma, eta_max, comparison: Comparison::Modulus })
}

pub fn squeeze_with(omega: &OmegaMap, v: &TimeFreqMap, params: &SqueezeParams) -> Result<SqueezeMap> {
    let SqueezeParams { alpha, gamma, eta_max, comparison } = *params;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("resolution alpha={alpha} must be positive")));
    }
    if !(eta_max >= 0.0) {
        return Err(invalid(format!("maximum frequency {eta_max} must be non-negative")));
    }
    if omega.times != v.times || omega.freqs != v.freqs {
        return Err(invalid("omega and transform grids differ"));
    }
    let nf = v.freqs.len;
    let n_xi = xi_count(alpha, eta_max);
    let mut mass = vec![0.0; v.times.len() * n_xi];
    for (m, row) in mass.chunks_mut(n_xi).enumerate() {
        for j in 0..nf {
            if v.freqs.freq(j) > eta_max {
                break;
            }
            let idx = m * nf + j;
            if !omega.valid[idx] || v.values[idx].norm() < gamma {
                continue;
            }
            if let Some(n) = bin_of(omega.omega[idx], alpha, n_xi, comparison) {
                row[n] += cell_measure(&v.freqs, j, eta_max);
            }
        }
    }
    Ok(SqueezeMap { times: v.times.clone(), alpha, gamma, eta_max, n_xi, mass })
}

/// Per-time support of the squeezed transform.
#[derive(Clone, Debug, PartialEq)]
pub struct IfSet {
    pub times: Vec<f64>,
    pub alpha: f64,
    pub members: Vec<Vec<f64>>,
}

impl IfSet {
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

/// `{alpha * n : S(t, alpha * n) > support_floor}` for every time.
pub fn extract_if_set(s: &SqueezeMap, support_floor: f64) -> IfSet {
    let members = (0..s.n_times())
        .map(|m| {
            s.row(m)
                .iter()
                .enumerate()
                .filter(|(_, &mass)| mass > support_floor)
                .map(|(n, _)| s.xi(n))
                .collect()
        })
        .collect();
    IfSet { times: s.times.clone(), alpha: s.alpha, members }
}

/// A chain of set members linked across consecutive times.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    /// `(time index, xi)` pairs in time order.
    pub points: Vec<(usize, f64)>,
}

impl Curve {
    pub fn first_time(&self) -> usize {
        self.points[0].0
    }

    pub fn last_time(&self) -> usize {
        self.points[self.points.len() - 1].0
    }

    pub fn at(&self, m: usize) -> Option<f64> {
        self.points.iter().find(|(t, _)| *t == m).map(|&(_, xi)| xi)
    }
}

/// Greedy nearest-continuation linking. A curve alive at time `m - 1` takes
/// the closest member at time `m` within `2 * alpha`; ties go to the lower
/// frequency. Leftover members start new curves.
pub fn link_curves(set: &IfSet) -> Vec<Curve> {
    let reach = 2.0 * set.alpha * (1.0 + 1e-9);
    let mut curves: Vec<Curve> = Vec::new();
    let mut alive: Vec<usize> = Vec::new();
    for (m, members) in set.members.iter().enumerate() {
        let mut candidates: Vec<(f64, f64, usize, usize)> = Vec::new();
        for &c in &alive {
            let (_, last) = curves[c].points[curves[c].points.len() - 1];
            for (k, &xi) in members.iter().enumerate() {
                let d = (xi - last).abs();
                if d <= reach {
                    candidates.push((d, xi, c, k));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut curve_taken = vec![false; curves.len()];
        let mut member_taken = vec![false; members.len()];
        let mut next_alive = Vec::new();
        for (_, xi, c, k) in candidates {
            if curve_taken[c] || member_taken[k] {
                continue;
            }
            curve_taken[c] = true;
            member_taken[k] = true;
            curves[c].points.push((m, xi));
            next_alive.push(c);
        }
        for (k, &xi) in members.iter().enumerate() {
            if !member_taken[k] {
                next_alive.push(curves.len());
                curves.push(Curve { points: vec![(m, xi)] });
            }
        }
        alive = next_alive;
    }
    curves
}

/// Window integrals and error constants of the recovery bound. `E2` and
/// `E2'` have no closed form and are taken as zero, so `alpha_min` is a
/// lower-bound proxy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// `integrals[n][m] = int |u|^n |g^(m)(u)| du`
    pub integrals: [[f64; 3]; 3],
    pub epsilon: f64,
    pub separation: f64,
    pub e1: f64,
    pub e1_prime: f64,
    pub e3: f64,
    pub alpha_min: f64,
    /// Whether the window bandwidth fits inside `[-d/2, d/2]`.
    pub window_fits_separation: bool,
    pub base_interval: f64,
    pub max_offset: f64,
    pub perturbation_bound_satisfied: bool,
}

impl BoundReport {
    pub fn integral(&self, n: usize, m: usize) -> f64 {
        self.integrals[n][m]
    }

    /// Increase of `|V|` caused by sample noise bounded by `noise_bound`:
    /// `noise_bound * (I_0 + 2 T I_0')`.
    pub fn noise_threshold(&self, noise_bound: f64) -> f64 {
        noise_bound * (self.integral(0, 0) + 2.0 * self.base_interval * self.integral(0, 1))
    }
}

/// `int |u|^n |g^(m)(u)| du` over the truncated window support.
pub fn window_integral(window: &Window, n: usize, m: usize) -> f64 {
    let radius = window.effective_radius();
    let integrand = |u: f64| u.powi(n as i32) * window.derivative_of_order(m, u).abs();
    // Split at the sign changes of g'' so each piece is smooth.
    let mut knots = vec![0.0];
    if m == 2 {
        let Window::Gaussian { scale } = *window;
        knots.push((1.0 / (2.0 * scale * PI)).sqrt());
    }
    knots.push(radius);
    let half: f64 = knots.windows(2).map(|w| adaptive_simpson(&integrand, w[0], w[1], 1e-14)).sum();
    2.0 * half
}

pub fn bound_report(
    spec: &SignalSpec,
    window: &Window,
    epsilon: f64,
    d: f64,
    schedule: &SamplingSchedule,
) -> Result<BoundReport> {
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon={epsilon} must be non-negative")));
    }
    if !(d > 0.0) {
        return Err(invalid(format!("separation d={d} must be positive")));
    }
    let mut integrals = [[0.0; 3]; 3];
    for (n, row) in integrals.iter_mut().enumerate() {
        for (m, value) in row.iter_mut().enumerate() {
            *value = window_integral(window, n, m);
        }
    }
    let (i0, i1, i2) = (integrals[0][0], integrals[1][0], integrals[2][0]);
    let norms = spec.component_norms();
    // Both sums carry a common factor epsilon; keep it out so the ratio stays
    // defined at epsilon = 0.
    let s1: f64 = norms.iter().map(|c| c.frequency * (i1 + PI * c.amplitude * i2)).sum();
    let s1_prime: f64 = norms
        .iter()
        .map(|c| {
            c.frequency
                * (i0 / (2.0 * PI) + (c.amplitude + c.frequency) * i1 + PI * c.amplitude * c.frequency * i2)
        })
        .sum();
    let e3 = norms.iter().fold(0.0f64, |m, c| m.max(c.frequency));
    let alpha_min = if s1 > 0.0 { 2.0 * s1_prime / s1 + 2.0 * e3 } else { 2.0 * e3 };
    Ok(BoundReport {
        integrals,
        epsilon,
        separation: d,
        e1: epsilon * s1,
        e1_prime: epsilon * s1_prime,
        e3,
        alpha_min,
        window_fits_separation: window.nominal_bandwidth() <= 0.5 * d,
        base_interval: schedule.base_interval(),
        max_offset: schedule.max_offset(),
        perturbation_bound_satisfied: schedule.within_perturbation_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stft::gaussian_window;

    fn map(values: Vec<Complex64>, nt: usize, step: f64) -> TimeFreqMap {
        let nf = values.len() / nt;
        TimeFreqMap {
            times: (0..nt).map(|m| m as f64).collect(),
            freqs: FreqGrid::new(step, nf).unwrap(),
            values,
        }
    }

    #[test]
    fn omega_of_exact_tone() {
        // V = e^{2 pi i t} c(eta), dV = 2 pi i V.
        let v = map(vec![Complex64::new(0.3, 0.4); 6], 2, 0.5);
        let dv = map(v.values.iter().map(|x| x * Complex64::new(0.0, 2.0 * PI)).collect(), 2, 0.5);
        let w = if_information(&v, &dv, 0.0).unwrap();
        assert_eq!(w.valid_count(), 6);
        assert!(w.omega.iter().all(|o| (o - 1.0).norm() < 1e-14));

        let none = if_information(&v, &dv, 1.0).unwrap();
        assert_eq!(none.valid_count(), 0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let v = map(vec![Complex64::new(1.0, 0.0); 6], 2, 0.5);
        let dv = map(vec![Complex64::new(1.0, 0.0); 6], 3, 0.5);
        assert!(if_information(&v, &dv, 0.0).is_err());
    }

    #[test]
    fn zero_transform_is_invalid_even_at_zero_threshold() {
        let v = map(vec![Complex64::new(0.0, 0.0); 4], 1, 1.0);
        let w = if_information(&v, &v, 0.0).unwrap();
        assert_eq!(w.valid_count(), 0);
        let s = squeeze(&w, &v, 0.3, 0.0, 3.0).unwrap();
        assert!(s.mass.iter().all(|&m| m == 0.0));
        assert!(extract_if_set(&s, 0.0).members.iter().all(Vec::is_empty));
    }

    #[test]
    fn squeeze_rejects_bad_alpha() {
        let v = map(vec![Complex64::new(1.0, 0.0); 4], 1, 1.0);
        let w = if_information(&v, &v, 0.0).unwrap();
        assert!(squeeze(&w, &v, 0.0, 0.0, 3.0).is_err());
        assert!(squeeze(&w, &v, -0.1, 0.0, 3.0).is_err());
    }

    #[test]
    fn modulus_versus_real_part() {
        let omega = Complex64::new(1.0, 0.12);
        assert_eq!(bin_of(omega, 0.3, 20, Comparison::Modulus), None);
        assert_eq!(bin_of(omega, 0.3, 20, Comparison::RealPart), Some(3));
        assert_eq!(bin_of(Complex64::new(1.0, 0.0), 0.3, 20, Comparison::Modulus), Some(3));
        assert_eq!(bin_of(Complex64::new(-1.0, 0.0), 0.3, 20, Comparison::Modulus), None);
    }

    #[test]
    fn cell_measure_clips_to_range() {
        let f = FreqGrid::new(0.1, 11).unwrap();
        assert!((cell_measure(&f, 0, 1.0) - 0.05).abs() < 1e-15);
        assert!((cell_measure(&f, 5, 1.0) - 0.1).abs() < 1e-15);
        assert!((cell_measure(&f, 10, 1.0) - 0.05).abs() < 1e-12);
        let total: f64 = (0..11).map(|j| cell_measure(&f, j, 1.0)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linking_follows_nearest_and_prefers_lower() {
        let set = IfSet {
            times: vec![0.0, 1.0, 2.0, 3.0],
            alpha: 0.1,
            members: vec![vec![1.0, 2.0], vec![1.1, 2.0], vec![1.2, 1.9, 5.0], vec![1.4]],
        };
        let curves = link_curves(&set);
        assert_eq!(curves.len(), 3);
        assert_eq!(curves[0].points, vec![(0, 1.0), (1, 1.1), (2, 1.2), (3, 1.4)]);
        assert_eq!(curves[1].points, vec![(0, 2.0), (1, 2.0), (2, 1.9)]);
        assert_eq!(curves[2].points, vec![(2, 5.0)]);

        let tie = IfSet { times: vec![0.0, 1.0], alpha: 0.1, members: vec![vec![1.0], vec![0.9, 1.1]] };
        assert_eq!(link_curves(&tie)[0].points, vec![(0, 1.0), (1, 0.9)]);
    }

    #[test]
    fn unit_gaussian_integrals() {
        let g = gaussian_window(1.0).unwrap();
        assert!((window_integral(&g, 0, 0) - 1.0).abs() < 1e-10);
        assert!((window_integral(&g, 1, 0) - 1.0 / PI).abs() < 1e-10);
        assert!((window_integral(&g, 2, 0) - 1.0 / (2.0 * PI)).abs() < 1e-10);
        assert!((window_integral(&g, 0, 1) - 2.0).abs() < 1e-10);
    }
}
