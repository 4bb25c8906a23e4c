use std::path::Path;

use serde::Serialize;

use ifsq_core::bandlimited::{analytic_extension, default_order, evaluate, reconstruct, ReconstructionResult};
use ifsq_core::edr::{default_edr_config, run_edr, synthetic_fixture, FixtureParams};
use ifsq_core::figures::{figure, two_component_average, Figure};
use ifsq_core::io;
use ifsq_core::metrics::{nearest_errors, pointwise_errors, summarize, ErrorSummary};
use ifsq_core::synchrosqueeze::link_curves;
use ifsq_core::{
    gaussian_window, synchrosqueeze_samples, AnalyticTrace, Basis, Error, IfSet, Interval, SampledSignal, SsConfig,
    SsOutput, UniformSeries,
};

use crate::error::{CliError, Result};
use crate::manifest::Run;
use crate::{BlArgs, BlFlags, CompareArgs, DumpArgs, EdrArgs, GenArgs, GenEdrArgs, Method, RunArgs, SsArgs};

const SAMPLES_HEADER: &str = "t,value\n";
const IF_SET_HEADER: &str = "t,xi\n";
const CURVES_HEADER: &str = "curve,t,xi\n";
const TRACE_HEADER: &str = "t,re,im,if_h\n";

#[derive(Serialize)]
struct GenConfig {
    figure: u8,
    base_interval: f64,
    tprime: f64,
    seed: u64,
    noise_variance: f64,
}

fn figure_samples(fig: &Figure, tprime: Option<f64>, seed: u64) -> Result<(GenConfig, SampledSignal)> {
    let tprime = tprime.unwrap_or(fig.default_tprime);
    let signal = fig.samples(tprime, seed)?;
    let config =
        GenConfig { figure: fig.id, base_interval: fig.base_interval, tprime, seed, noise_variance: fig.noise_variance };
    Ok((config, signal))
}

fn record_figure(run: &mut Run, fig: &Figure, signal: &SampledSignal) -> Result<()> {
    run.detail("formula", fig.formula)?;
    run.detail("truth_formula", fig.truth_formula)?;
    run.detail("sample_count", signal.len())?;
    run.detail("max_offset", signal.schedule().max_offset())?;
    run.detail("within_perturbation_bound", signal.schedule().within_perturbation_bound())
}

pub fn gen(args: &GenArgs, argv: Vec<String>) -> Result<()> {
    let fig = figure(args.figure)?;
    let (config, signal) = figure_samples(&fig, args.tprime, args.seed)?;
    let mut run = Run::new(&args.out_dir, "gen", argv)?;
    run.set_config(&config)?;
    run.write_output("samples.csv", |w| io::write_samples(w, &signal))?;
    record_figure(&mut run, &fig, &signal)?;
    run.finish()?;
    Ok(())
}

pub fn gen_edr(args: &GenEdrArgs, argv: Vec<String>) -> Result<()> {
    let params = FixtureParams { duration: args.duration, ..FixtureParams::default() };
    if !(params.duration > 2.0 * params.heart_interval) {
        return Err(CliError::Usage(format!("--duration {} is too short", args.duration)));
    }
    let (record, respiration) = synthetic_fixture(&params, args.seed)?;
    let mut run = Run::new(&args.out_dir, "gen-edr", argv)?;
    run.set_config(serde_json::json!({
        "seed": args.seed,
        "duration": params.duration,
        "heart_interval": params.heart_interval,
        "jitter": params.jitter,
        "respiration_frequency": params.respiration_frequency,
        "modulation_depth": params.modulation_depth,
        "resp_rate": params.resp_rate,
    }))?;
    run.write_output("rpeaks.csv", |w| io::write_rpeaks(w, &record))?;
    run.write_output("respiration.csv", |w| io::write_series(w, &respiration.times(), respiration.values()))?;
    run.detail("peak_count", record.len())?;
    run.detail("mean_heart_rate", record.mean_heart_rate())?;
    run.finish()?;
    Ok(())
}

/// True when a samples file has no data rows.
fn has_no_rows(bytes: &[u8]) -> bool {
    bytes.split(|&b| b == b'\n').skip(1).all(|line| line.iter().all(u8::is_ascii_whitespace))
}

/// Parses samples. A well-formed file without rows yields `None`.
fn load_samples(bytes: &[u8], base_interval: Option<f64>) -> Result<Option<SampledSignal>> {
    match io::read_samples_with_interval(bytes, base_interval) {
        Ok(signal) => Ok(Some(signal)),
        Err(Error::Validation(_)) if has_no_rows(bytes) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Writes header-only outputs and the manifest, then reports the empty input.
fn finish_empty(mut run: Run, outputs: &[(&str, &str)]) -> Result<()> {
    for &(name, header) in outputs {
        run.write_output(name, |w| {
            w.extend_from_slice(header.as_bytes());
            Ok(())
        })?;
    }
    run.detail("sample_count", 0)?;
    run.finish()?;
    Err(Error::Validation("input has no samples".into()).into())
}

fn check_transform(out: &SsOutput) -> Result<()> {
    let peak = out.transform.max_abs();
    if !peak.is_finite() {
        return Err(CliError::Numerical(format!("STFT magnitude is {peak}")));
    }
    Ok(())
}

fn resolved(config: &SsConfig, out: &SsOutput) -> SsConfig {
    SsConfig { grid_dt: Some(out.grid_dt), eta_max: Some(out.eta_max), ..*config }
}

fn write_curves(w: &mut Vec<u8>, set: &IfSet) -> ifsq_core::Result<()> {
    let rows: Vec<Vec<String>> = link_curves(set)
        .iter()
        .enumerate()
        .flat_map(|(c, curve)| {
            curve.points.iter().map(move |&(m, xi)| vec![c.to_string(), set.times[m].to_string(), xi.to_string()])
        })
        .collect();
    io::write_table(w, &["curve", "t", "xi"], &rows)
}

fn record_set(run: &mut Run, out: &SsOutput) -> Result<()> {
    let sizes = out.set.sizes();
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64;
    run.detail("window_radius", out.window.effective_radius())?;
    run.detail("time_count", sizes.len())?;
    run.detail("mean_set_size", mean)?;
    run.detail("max_set_size", sizes.iter().copied().max().unwrap_or(0))
}

fn run_ss(signal: &SampledSignal, config: &SsConfig) -> Result<SsOutput> {
    let out = synchrosqueeze_samples(signal, config)?;
    check_transform(&out)?;
    Ok(out)
}

pub fn ss(args: &SsArgs, argv: Vec<String>) -> Result<()> {
    let mut run = Run::new(&args.out_dir, "ss", argv)?;
    let bytes = run.read_input(&args.input)?;
    let config = args.ss.resolve(SsConfig::default());
    let Some(signal) = load_samples(&bytes, args.base_interval)? else {
        run.set_config(config)?;
        let mut empty = vec![("if_set.csv", IF_SET_HEADER), ("curves.csv", CURVES_HEADER)];
        if args.squeeze_map {
            empty.push(("squeeze_map.csv", "t\\ξ\n"));
        }
        return finish_empty(run, &empty);
    };
    let out = run_ss(&signal, &config)?;
    run.set_config(resolved(&config, &out))?;
    run.write_output("if_set.csv", |w| io::write_if_set(w, &out.set))?;
    run.write_output("curves.csv", |w| write_curves(w, &out.set))?;
    if args.squeeze_map {
        run.write_output("squeeze_map.csv", |w| io::write_squeeze_map(w, &out.squeeze))?;
    }
    run.detail("sample_count", signal.len())?;
    run.detail("base_interval", signal.schedule().base_interval())?;
    record_set(&mut run, &out)?;
    run.finish()?;
    Ok(())
}

pub fn dump(args: &DumpArgs, argv: Vec<String>) -> Result<()> {
    let mut run = Run::new(&args.out_dir, "dump", argv)?;
    let bytes = run.read_input(&args.input)?;
    let config = args.ss.resolve(SsConfig::default());
    let Some(signal) = load_samples(&bytes, args.base_interval)? else {
        run.set_config(config)?;
        return finish_empty(run, &[("stft_map.csv", "t\\η\n"), ("squeeze_map.csv", "t\\ξ\n")]);
    };
    let out = run_ss(&signal, &config)?;
    run.set_config(resolved(&config, &out))?;
    run.write_output("stft_map.csv", |w| io::write_tf_map(w, &out.transform))?;
    run.write_output("squeeze_map.csv", |w| io::write_squeeze_map(w, &out.squeeze))?;
    run.detail("max_abs_stft", out.transform.max_abs())?;
    record_set(&mut run, &out)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct BlConfig {
    order: usize,
    basis: Basis,
    trace_step: f64,
    base_interval: f64,
}

/// Times from the first to the last sample in steps of `step`.
fn trace_times(signal: &SampledSignal, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!("--trace-step {step} must be positive")));
    }
    let t = signal.times();
    let (first, last) = (t[0], t[t.len() - 1]);
    let n = ((last - first) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| first + step * k as f64).collect())
}

struct BlOutput {
    config: BlConfig,
    result: ReconstructionResult,
    /// Present for the sinc basis.
    trace: Option<AnalyticTrace>,
    times: Vec<f64>,
}

fn run_bl(signal: &SampledSignal, flags: &BlFlags) -> Result<BlOutput> {
    let base_interval = signal.schedule().base_interval();
    let order = flags.order_n.unwrap_or_else(|| default_order(signal));
    let basis = Basis::from(flags.basis);
    let trace_step = flags.trace_step.unwrap_or(base_interval);
    let times = trace_times(signal, trace_step)?;
    let result = reconstruct(signal, order, basis)?;
    if !result.residual.is_finite() || result.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Numerical("least-squares solution is not finite".into()));
    }
    let trace = match basis {
        Basis::Sinc => Some(analytic_extension(&result, &times)?),
        Basis::Dft => None,
    };
    Ok(BlOutput { config: BlConfig { order, basis, trace_step, base_interval }, result, trace, times })
}

fn write_bl(run: &mut Run, bl: &BlOutput) -> Result<()> {
    let r = &bl.result;
    let n_order = r.order as i64;
    let rows: Vec<Vec<String>> = (-n_order..=n_order)
        .map(|n| {
            let c = r.coefficient(n);
            vec![n.to_string(), c.re.to_string(), c.im.to_string()]
        })
        .collect();
    run.write_output("coefficients.csv", |w| io::write_table(w, &["n", "re", "im"], &rows))?;
    match &bl.trace {
        Some(trace) => run.write_output("trace.csv", |w| io::write_trace(w, trace))?,
        None => {
            let values: Vec<f64> = bl.times.iter().map(|&t| evaluate(r, t)).collect();
            run.write_output("reconstruction.csv", |w| io::write_series(w, &bl.times, &values))?;
        }
    }
    run.detail("centering", r.centering)?;
    run.detail("rank", r.rank)?;
    run.detail("rank_deficient", r.rank_deficient())?;
    run.detail("residual", r.residual)?;
    if let Some(trace) = &bl.trace {
        run.detail("if_defined_count", trace.defined_count())?;
    }
    Ok(())
}

pub fn bl(args: &BlArgs, argv: Vec<String>) -> Result<()> {
    let mut run = Run::new(&args.out_dir, "bl", argv)?;
    let bytes = run.read_input(&args.input)?;
    let Some(signal) = load_samples(&bytes, args.base_interval)? else {
        let main = match args.bl.basis {
            crate::BasisArg::Sinc => ("trace.csv", TRACE_HEADER),
            crate::BasisArg::Dft => ("reconstruction.csv", SAMPLES_HEADER),
        };
        return finish_empty(run, &[("coefficients.csv", "n,re,im\n"), main]);
    };
    let out = run_bl(&signal, &args.bl)?;
    run.set_config(&out.config)?;
    write_bl(&mut run, &out)?;
    run.detail("sample_count", signal.len())?;
    run.finish()?;
    Ok(())
}

/// Reference curves of a figure: one per component, plus the two-component
/// average for figure 6.
fn targets(fig: &Figure) -> Vec<(String, Box<dyn Fn(f64) -> f64 + '_>)> {
    let start = fig.interval().start;
    let mut out: Vec<(String, Box<dyn Fn(f64) -> f64 + '_>)> = (0..fig.truth(start).len())
        .map(|k| (format!("component_{}", k + 1), Box::new(move |t| fig.truth(t)[k]) as Box<dyn Fn(f64) -> f64>))
        .collect();
    if fig.id == 6 {
        out.push(("average".into(), Box::new(two_component_average)));
    }
    out
}

enum Estimate<'a> {
    Set(&'a IfSet),
    Trace(&'a [f64], &'a [Option<f64>]),
}

struct Scores {
    times: Vec<f64>,
    names: Vec<String>,
    errors: Vec<Vec<Option<f64>>>,
    summaries: Vec<ErrorSummary>,
}

fn score(fig: &Figure, estimate: Estimate, interior: Interval, tolerance: f64) -> Scores {
    let times = match estimate {
        Estimate::Set(set) => set.times.clone(),
        Estimate::Trace(t, _) => t.to_vec(),
    };
    let mut names = Vec::new();
    let mut errors = Vec::new();
    let mut summaries = Vec::new();
    for (name, truth) in targets(fig) {
        let e = match estimate {
            Estimate::Set(set) => nearest_errors(&set.times, &set.members, &truth),
            Estimate::Trace(t, v) => pointwise_errors(t, v, &truth),
        };
        summaries.push(summarize(&times, &e, interior, tolerance));
        names.push(name);
        errors.push(e);
    }
    Scores { times, names, errors, summaries }
}

fn write_scores(run: &mut Run, scores: &Scores, suffix: &str) -> Result<()> {
    let mut header: Vec<&str> = vec!["t"];
    header.extend(scores.names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = scores
        .times
        .iter()
        .enumerate()
        .map(|(m, t)| {
            std::iter::once(t.to_string())
                .chain(scores.errors.iter().map(|e| e[m].map_or_else(String::new, |x| x.to_string())))
                .collect()
        })
        .collect();
    run.write_output(&format!("metrics{suffix}.csv"), |w| io::write_table(w, &header, &rows))?;
    let summary: Vec<Vec<String>> = scores
        .names
        .iter()
        .zip(&scores.summaries)
        .map(|(name, s)| {
            vec![
                name.clone(),
                s.count.to_string(),
                s.median.to_string(),
                s.p95.to_string(),
                s.coverage.to_string(),
                s.tolerance.to_string(),
            ]
        })
        .collect();
    run.write_output(&format!("summary{suffix}.csv"), |w| {
        io::write_table(w, &["target", "count", "median", "p95", "coverage", "tolerance"], &summary)
    })?;
    let key = format!("summary{suffix}");
    let by_name: std::collections::BTreeMap<&str, &ErrorSummary> =
        scores.names.iter().map(String::as_str).zip(&scores.summaries).collect();
    run.detail(&key, by_name)
}

fn interior(fig: &Figure, window_scale: f64) -> Result<Interval> {
    let radius = gaussian_window(window_scale)?.effective_radius();
    fig.interval()
        .shrink(radius)
        .ok_or_else(|| CliError::Usage(format!("window radius {radius} leaves no interior in the record")))
}

pub fn compare(args: &CompareArgs, argv: Vec<String>) -> Result<()> {
    let fig = figure(args.truth)?;
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha {} must be positive", args.alpha)));
    }
    let inner = interior(&fig, args.window_scale)?;
    let mut run = Run::new(&args.out_dir, "compare", argv)?;
    let bytes = run.read_input(&args.input)?;
    run.set_config(serde_json::json!({
        "truth": args.truth,
        "alpha": args.alpha,
        "window_scale": args.window_scale,
        "tolerance": 2.0 * args.alpha,
    }))?;
    let tolerance = 2.0 * args.alpha;
    let scores = if bytes.starts_with(TRACE_HEADER.trim_end().as_bytes()) {
        let (times, values) = io::read_trace_if(bytes.as_slice())?;
        run.detail("input_kind", "trace")?;
        score(&fig, Estimate::Trace(&times, &values), inner, tolerance)
    } else if bytes.starts_with(IF_SET_HEADER.trim_end().as_bytes()) {
        let set = io::read_if_set(bytes.as_slice(), args.alpha)?;
        run.detail("input_kind", "if_set")?;
        score(&fig, Estimate::Set(&set), inner, tolerance)
    } else {
        return Err(Error::Parse { line: 1, message: "expected an IF set ('t,xi') or trace ('t,re,im,if_h') header".into() }
            .into());
    };
    write_scores(&mut run, &scores, "")?;
    let empty = scores.times.is_empty();
    run.finish()?;
    if empty {
        return Err(Error::Validation("input has no rows".into()).into());
    }
    Ok(())
}

pub fn run(args: &RunArgs, argv: Vec<String>) -> Result<()> {
    let fig = figure(args.figure)?;
    let (gen_config, signal) = figure_samples(&fig, args.tprime, args.seed)?;
    let defaults = SsConfig { gamma: fig.gamma.unwrap_or(SsConfig::default().gamma), ..SsConfig::default() };
    let ss_config = args.ss.resolve(defaults);
    let inner = interior(&fig, ss_config.window_scale)?;
    let tolerance = 2.0 * ss_config.alpha;

    let mut run = Run::new(&args.out_dir, "run", argv)?;
    run.write_output("samples.csv", |w| io::write_samples(w, &signal))?;
    record_figure(&mut run, &fig, &signal)?;
    let mut config = serde_json::Map::new();
    config.insert("samples".into(), serde_json::to_value(&gen_config)?);
    config.insert("method".into(), serde_json::to_value(args.method)?);

    if matches!(args.method, Method::Ss | Method::Both) {
        let out = run_ss(&signal, &ss_config)?;
        config.insert("ss".into(), serde_json::to_value(resolved(&ss_config, &out))?);
        run.write_output("if_set.csv", |w| io::write_if_set(w, &out.set))?;
        run.write_output("curves.csv", |w| write_curves(w, &out.set))?;
        record_set(&mut run, &out)?;
        let scores = score(&fig, Estimate::Set(&out.set), inner, tolerance);
        write_scores(&mut run, &scores, "_ss")?;
    }
    if matches!(args.method, Method::Bl | Method::Both) {
        let out = run_bl(&signal, &args.bl)?;
        config.insert("bl".into(), serde_json::to_value(&out.config)?);
        write_bl(&mut run, &out)?;
        if let Some(trace) = &out.trace {
            let scores = score(&fig, Estimate::Trace(&trace.times, &trace.if_h), inner, tolerance);
            write_scores(&mut run, &scores, "_bl")?;
        }
    }
    run.set_config(serde_json::Value::Object(config))?;
    run.finish()?;
    Ok(())
}

fn nearest(set: &[f64], target: Option<f64>) -> String {
    target
        .and_then(|x| set.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())))
        .map_or_else(String::new, |v| v.to_string())
}

fn read_series(run: &mut Run, path: &Path) -> Result<UniformSeries> {
    let bytes = run.read_input(path)?;
    let signal = io::read_samples(bytes.as_slice())?;
    Ok(UniformSeries::from_samples(signal.times(), &signal.real_values())?)
}

pub fn edr(args: &EdrArgs, argv: Vec<String>) -> Result<()> {
    let mut run = Run::new(&args.out_dir, "edr", argv)?;
    let bytes = run.read_input(&args.rpeaks)?;
    let record = io::read_rpeaks(bytes.as_slice())?;
    let respiration = args.respiration.as_deref().map(|p| read_series(&mut run, p)).transpose()?;
    let config = args.ss.resolve(default_edr_config());
    let out = run_edr(&record, respiration.as_ref(), &config)?;
    check_transform(&out.rpeaks)?;
    run.set_config(resolved(&config, &out.rpeaks))?;
    run.write_output("edr_if_set.csv", |w| io::write_if_set(w, &out.rpeaks.set))?;
    run.write_output("edr_curves.csv", |w| write_curves(w, &out.rpeaks.set))?;
    if let Some(reference) = &out.respiration {
        run.write_output("respiration_if_set.csv", |w| io::write_if_set(w, &reference.set))?;
        let rows: Vec<Vec<String>> = (0..out.rpeaks.set.times.len())
            .map(|m| {
                let if_h = reference.if_h[m];
                vec![
                    out.rpeaks.set.times[m].to_string(),
                    if_h.map_or_else(String::new, |x| x.to_string()),
                    nearest(&out.rpeaks.set.members[m], if_h),
                    nearest(&reference.set.members[m], if_h),
                ]
            })
            .collect();
        run.write_output("respiration_comparison.csv", |w| {
            io::write_table(w, &["t", "respiration_if_h", "edr_nearest", "respiration_ss_nearest"], &rows)
        })?;
    }
    let times = record.times();
    run.detail("peak_count", record.len())?;
    run.detail("duration", times[times.len() - 1] - times[0])?;
    run.detail("mean_interval", record.mean_interval())?;
    run.detail("mean_heart_rate", record.mean_heart_rate())?;
    record_set(&mut run, &out.rpeaks)?;
    run.finish()?;
    Ok(())
}
