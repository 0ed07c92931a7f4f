//! `universim`: build simulators, sweep parameters, and emit CSV with
//! exactly computed approximation-error curves.

mod config;
mod csv;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("size cap: {0}")]
    Cap(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<universim_core::Error> for CliError {
    fn from(e: universim_core::Error) -> Self {
        match e {
            universim_core::Error::SizeCap(msg) => CliError::Cap(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Cap(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "universim",
    about = "Exact-error experiments for universal and seed-aware simulation of target laws"
)]
struct Args {
    /// Experiment to run; must match the `experiment` field of the config.
    #[arg(value_parser = parse_experiment)]
    experiment: ExperimentKind,
    /// JSON config file with experiment parameters.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; overrides `output_path`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a seeded sampling histogram next to the CSV (needs --out).
    #[arg(long)]
    samples: Option<u64>,
    /// Override the config's RNG seed (affects only --samples output).
    #[arg(long)]
    rng_seed: Option<u64>,
}

fn parse_experiment(s: &str) -> Result<ExperimentKind, String> {
    match s {
        "sawtooth_sweep" => Ok(ExperimentKind::SawtoothSweep),
        "quantized_seed" => Ok(ExperimentKind::QuantizedSeed),
        "type_decay" => Ok(ExperimentKind::TypeDecay),
        "markov_decay" => Ok(ExperimentKind::MarkovDecay),
        "squeeze_sweep" => Ok(ExperimentKind::SqueezeSweep),
        "clt_baseline" => Ok(ExperimentKind::CltBaseline),
        other => Err(format!("unknown experiment \"{other}\"")),
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    if config.experiment != args.experiment {
        return Err(CliError::Config(format!(
            "config is for \"{}\", command line asked for \"{}\"",
            config.experiment.name(),
            args.experiment.name()
        )));
    }
    let table = match args.experiment {
        ExperimentKind::SawtoothSweep => experiments::run_sawtooth_sweep(&config)?,
        ExperimentKind::QuantizedSeed => experiments::run_quantized_seed(&config)?,
        ExperimentKind::TypeDecay => experiments::run_type_decay(&config)?,
        ExperimentKind::MarkovDecay => experiments::run_markov_decay(&config)?,
        ExperimentKind::SqueezeSweep => experiments::run_squeeze_sweep(&config)?,
        ExperimentKind::CltBaseline => experiments::run_clt_baseline(&config)?,
    };
    let out_path = args.out.clone().or_else(|| config.output_path.clone());
    let rendered = table.render();
    match &out_path {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    if let Some(samples) = args.samples {
        let path = out_path.ok_or_else(|| {
            CliError::Config("--samples needs --out (histogram is written next to it)".into())
        })?;
        let rng_seed = args.rng_seed.unwrap_or(config.rng_seed);
        let hist = experiments::sample_histogram(&config, samples, rng_seed)?;
        let mut hist_path = path.into_os_string();
        hist_path.push(".hist.csv");
        let hist_path = PathBuf::from(hist_path);
        std::fs::write(&hist_path, hist.render())
            .map_err(|e| CliError::Io(format!("{}: {e}", hist_path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("universim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
