//! CSV readers and writers for samples, R peaks, IF sets, traces and maps.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so output
//! bytes depend only on the values.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::bandlimited::AnalyticTrace;
use crate::edr::RPeakRecord;
use crate::error::{Error, Result};
use crate::signals::{SampledSignal, SamplingSchedule};
use crate::stft::TimeFreqMap;
use crate::synchrosqueeze::{IfSet, SqueezeMap};

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

/// Reads two named numeric columns. Rows must have exactly two fields.
fn read_pairs(reader: impl Read, first: &str, second: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != first || &headers[1] != second {
        return Err(Error::Parse { line: 1, message: format!("expected header '{first},{second}'") });
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64> {
            let field = &record[i];
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line, message: format!("'{field}' is not a finite number") })
        };
        a.push(parse(0)?);
        b.push(parse(1)?);
    }
    Ok((a, b))
}

/// Reads a `t,value` file. Times must be strictly increasing.
pub fn read_samples(reader: impl Read) -> Result<SampledSignal> {
    let (times, values) = read_pairs(reader, "t", "value")?;
    let schedule = SamplingSchedule::from_times(times)?;
    SampledSignal::from_real(schedule, &values)
}

/// As [`read_samples`], keeping the base interval of the generating schedule.
pub fn read_samples_with_interval(reader: impl Read, base_interval: Option<f64>) -> Result<SampledSignal> {
    let signal = read_samples(reader)?;
    match base_interval {
        None => Ok(signal),
        Some(t) => {
            let schedule = SamplingSchedule::with_base_interval(signal.times().to_vec(), t)?;
            SampledSignal::new(schedule, signal.values().to_vec())
        }
    }
}

pub fn read_rpeaks(reader: impl Read) -> Result<RPeakRecord> {
    let (times, amplitudes) = read_pairs(reader, "t", "amplitude")?;
    RPeakRecord::new(times, amplitudes)
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_samples(out: impl Write, signal: &SampledSignal) -> Result<()> {
    write_pairs(out, "t", "value", signal.times(), &signal.real_values())
}

pub fn write_rpeaks(out: impl Write, record: &RPeakRecord) -> Result<()> {
    write_pairs(out, "t", "amplitude", record.times(), record.amplitudes())
}

pub fn write_series(out: impl Write, times: &[f64], values: &[f64]) -> Result<()> {
    write_pairs(out, "t", "value", times, values)
}

fn write_pairs(out: impl Write, a: &str, b: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut w = writer(out);
    w.write_record([a, b]).map_err(csv_error)?;
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([x.to_string(), y.to_string()]).map_err(csv_error)?;
    }
    finish(w)
}

/// Ragged rows `t, xi_1, xi_2, ...`.
pub fn write_if_set(out: impl Write, set: &IfSet) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "xi"]).map_err(csv_error)?;
    for (t, members) in set.times.iter().zip(&set.members) {
        let row: Vec<String> = std::iter::once(t.to_string()).chain(members.iter().map(f64::to_string)).collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

/// Reads a ragged IF set file as written by [`write_if_set`].
pub fn read_if_set(reader: impl Read, alpha: f64) -> Result<IfSet> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut times = Vec::new();
    let mut members = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter().filter(|f| !f.is_empty()) {
            let v = field
                .parse::<f64>()
                .map_err(|_| Error::Parse { line, message: format!("'{field}' is not a number") })?;
            values.push(v);
        }
        let Some((&t, rest)) = values.split_first() else {
            return Err(Error::Parse { line, message: "row without a time".into() });
        };
        times.push(t);
        members.push(rest.to_vec());
    }
    Ok(IfSet { times, alpha, members })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_trace(out: impl Write, trace: &AnalyticTrace) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "re", "im", "if_h"]).map_err(csv_error)?;
    for ((t, z), f) in trace.times.iter().zip(&trace.analytic).zip(&trace.if_h) {
        w.write_record([t.to_string(), z.re.to_string(), z.im.to_string(), opt(*f)]).map_err(csv_error)?;
    }
    finish(w)
}

/// Reads the `t` and `if_h` columns of a file written by [`write_trace`];
/// empty `if_h` cells are undefined values.
pub fn read_trace_if(reader: impl Read) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "re", "im", "if_h"] {
        return Err(Error::Parse { line: 1, message: "expected header 't,re,im,if_h'".into() });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |field: &str| {
            field.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("'{field}' is not a number") })
        };
        times.push(number(&record[0])?);
        values.push(if record[3].is_empty() { None } else { Some(number(&record[3])?) });
    }
    Ok((times, values))
}

/// Header `t\eta, eta_0, ...`; cells `re:im`.
pub fn write_tf_map(out: impl Write, map: &TimeFreqMap) -> Result<()> {
    let mut w = writer(out);
    let header: Vec<String> =
        std::iter::once("t\\η".to_string()).chain(map.freqs.iter().map(|f| f.to_string())).collect();
    w.write_record(&header).map_err(csv_error)?;
    for m in 0..map.n_times() {
        let row: Vec<String> = std::iter::once(map.times[m].to_string())
            .chain(map.row(m).iter().map(|z: &Complex64| format!("{}:{}", z.re, z.im)))
            .collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

pub fn write_squeeze_map(out: impl Write, s: &SqueezeMap) -> Result<()> {
    let mut w = writer(out);
    let header: Vec<String> =
        std::iter::once("t\\ξ".to_string()).chain((0..s.n_xi).map(|n| s.xi(n).to_string())).collect();
    w.write_record(&header).map_err(csv_error)?;
    for m in 0..s.n_times() {
        let row: Vec<String> =
            std::iter::once(s.times[m].to_string()).chain(s.row(m).iter().map(f64::to_string)).collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

/// Writes a header and rows of preformatted cells.
pub fn write_table(out: impl Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    finish(w)
}
