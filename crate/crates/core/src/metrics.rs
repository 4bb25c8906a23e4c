//! Error statistics of extracted IF values against reference curves.

use serde::Serialize;

use crate::signals::Interval;

/// Per-time distance from one reference value to the nearest extracted
/// member; `None` when the set is empty at that time.
pub fn nearest_errors(times: &[f64], members: &[Vec<f64>], truth: impl Fn(f64) -> f64) -> Vec<Option<f64>> {
    times
        .iter()
        .zip(members)
        .map(|(&t, set)| {
            let target = truth(t);
            set.iter().map(|&x| (x - target).abs()).min_by(f64::total_cmp)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorSummary {
    /// Times considered.
    pub count: usize,
    pub median: f64,
    pub p95: f64,
    /// Fraction of times with an error within the tolerance.
    pub coverage: f64,
    pub tolerance: f64,
}

/// Linear-interpolated percentile of a non-empty sample.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Summary over the times inside `interior`. Missing errors count as
/// infinite: they never cover and push the percentiles up.
pub fn summarize(times: &[f64], errors: &[Option<f64>], interior: Interval, tolerance: f64) -> ErrorSummary {
    let selected: Vec<f64> = times
        .iter()
        .zip(errors)
        .filter(|(&t, _)| interior.contains(t))
        .map(|(_, e)| e.unwrap_or(f64::INFINITY))
        .collect();
    let count = selected.len();
    let covered = selected.iter().filter(|&&e| e <= tolerance).count();
    ErrorSummary {
        count,
        median: percentile(&selected, 0.5),
        p95: percentile(&selected, 0.95),
        coverage: if count > 0 { covered as f64 / count as f64 } else { 0.0 },
        tolerance,
    }
}

/// `Some(x)` errors of single-valued estimates against a reference.
pub fn pointwise_errors(times: &[f64], values: &[Option<f64>], truth: impl Fn(f64) -> f64) -> Vec<Option<f64>> {
    times.iter().zip(values).map(|(&t, v)| v.map(|x| (x - truth(t)).abs())).collect()
}
