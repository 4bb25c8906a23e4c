//! `ifsq`: instantaneous-frequency pipelines over sampled signals.
//!
//! Every command writes its CSV outputs and a `manifest.json` into
//! `--out-dir`. Exit codes: 0 success, 2 usage, 3 parse, 4 validation,
//! 5 numerical failure, 6 I/O.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ifsq_core::{Basis, Comparison, SsConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "ifsq", version, about = "Instantaneous-frequency recovery from uniform and nonuniform samples")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one of the seven test signals.
    Gen(GenArgs),
    /// Write the synthetic R-peak and respiration fixture.
    GenEdr(GenEdrArgs),
    /// Synchrosqueezing IF sets from a samples file.
    Ss(SsArgs),
    /// Bandlimited reconstruction and Hilbert-transform IF from a samples file.
    Bl(BlArgs),
    /// Generate a test signal, run one or both methods and score them.
    Run(RunArgs),
    /// Score an IF set or trace file against a test signal's true IF.
    Compare(CompareArgs),
    /// Respiration IF from R-peak amplitudes.
    Edr(EdrArgs),
    /// Write the STFT and squeezed maps of a samples file.
    Dump(DumpArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonArg {
    Modulus,
    RealPart,
}

impl From<ComparisonArg> for Comparison {
    fn from(c: ComparisonArg) -> Self {
        match c {
            ComparisonArg::Modulus => Comparison::Modulus,
            ComparisonArg::RealPart => Comparison::RealPart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisArg {
    Sinc,
    Dft,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Sinc => Basis::Sinc,
            BasisArg::Dft => Basis::Dft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ss,
    Bl,
    Both,
}

/// Synchrosqueezing parameters; unset values take the command's defaults.
#[derive(Debug, Clone, Args)]
pub struct SsFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    window_scale: Option<f64>,
    #[arg(long)]
    grid_dt: Option<f64>,
    #[arg(long)]
    eta_max: Option<f64>,
    #[arg(long)]
    support_floor: Option<f64>,
    #[arg(long, value_enum)]
    comparison: Option<ComparisonArg>,
}

impl SsFlags {
    pub fn resolve(&self, defaults: SsConfig) -> SsConfig {
        SsConfig {
            window_scale: self.window_scale.unwrap_or(defaults.window_scale),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            grid_dt: self.grid_dt.or(defaults.grid_dt),
            eta_max: self.eta_max.or(defaults.eta_max),
            support_floor: self.support_floor.unwrap_or(defaults.support_floor),
            comparison: self.comparison.map_or(defaults.comparison, Comparison::from),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BlFlags {
    /// Basis half-order N; defaults to covering the record.
    #[arg(long = "order-N")]
    order_n: Option<usize>,
    #[arg(long, value_enum, default_value_t = BasisArg::Sinc)]
    basis: BasisArg,
    /// Spacing of the output trace; defaults to the base interval.
    #[arg(long)]
    trace_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    figure: u8,
    #[arg(long)]
    tprime: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenEdrArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 480.0)]
    duration: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Base interval T of the sampling lattice; defaults to the mean spacing.
    #[arg(long)]
    base_interval: Option<f64>,
    #[command(flatten)]
    ss: SsFlags,
    /// Also write the squeezed map.
    #[arg(long)]
    squeeze_map: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    base_interval: Option<f64>,
    #[command(flatten)]
    bl: BlFlags,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    figure: u8,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    #[arg(long)]
    tprime: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    ss: SsFlags,
    #[command(flatten)]
    bl: BlFlags,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// IF set (`t,xi,...`) or trace (`t,re,im,if_h`) file.
    #[arg(long)]
    input: PathBuf,
    /// Test signal whose true IF is the reference.
    #[arg(long)]
    truth: u8,
    /// Bin width; the tolerance is twice this.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Window scale used for the edge exclusion.
    #[arg(long, default_value_t = 0.1)]
    window_scale: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EdrArgs {
    #[arg(long)]
    rpeaks: PathBuf,
    /// Uniformly sampled respiration channel (`t,value`).
    #[arg(long)]
    respiration: Option<PathBuf>,
    #[command(flatten)]
    ss: SsFlags,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    base_interval: Option<f64>,
    #[command(flatten)]
    ss: SsFlags,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Runs a parsed command line; `argv` excludes the program name.
fn dispatch(cli: Cli, argv: &[String]) -> Result<()> {
    let recorded = manifest::strip_out_dir(argv);
    match cli.command {
        Command::Gen(a) => commands::gen(&a, recorded),
        Command::GenEdr(a) => commands::gen_edr(&a, recorded),
        Command::Ss(a) => commands::ss(&a, recorded),
        Command::Bl(a) => commands::bl(&a, recorded),
        Command::Run(a) => commands::run(&a, recorded),
        Command::Compare(a) => commands::compare(&a, recorded),
        Command::Edr(a) => commands::edr(&a, recorded),
        Command::Dump(a) => commands::dump(&a, recorded),
        Command::Replay(a) => replay(&a),
    }
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let m = manifest::load(&args.manifest)?;
    if m.argv.first().is_some_and(|c| c == "replay") {
        return Err(CliError::Usage("a replay manifest cannot be replayed".into()));
    }
    let mut argv = m.argv.clone();
    argv.push("--out-dir".into());
    argv.push(args.out_dir.display().to_string());
    let cli = Cli::try_parse_from(std::iter::once("ifsq".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments do not parse: {e}")))?;
    dispatch(cli, &argv)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ifsq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
