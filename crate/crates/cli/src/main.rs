//! Command line front end: runs experiment configs and writes CSV and JSON artifacts.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{default_config, Experiment, ExperimentConfig};

pub const OUT_ENV: &str = "PARITY_PHOTONS_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource cap: {0}")]
    Resource(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::Resource(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Numerical(_) => "numerical",
            CliError::Resource(_) => "resource",
            CliError::Io(_) => "io",
        }
    }
}

impl From<parity_photons::Error> for CliError {
    fn from(e: parity_photons::Error) -> Self {
        use parity_photons::Error as E;
        match e {
            E::DimensionCap { .. } | E::SizeOverflow { .. } => CliError::Resource(e.to_string()),
            E::InvalidParameter(_) | E::Resonance(_) => CliError::Schema(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "parity-photons", version, about = "Parity-assisted two-photon generation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rabi spectrum versus coupling, with parities.
    Spectrum(RunArgs),
    /// Closed-system pair, Bell or W generation.
    Generate(RunArgs),
    /// Open-system generation and reconstruction of both mode marginals.
    Copies(RunArgs),
    /// Transfer of the Bell photons onto two ancilla qubits.
    Swap(RunArgs),
    /// Generation time versus number of cavities.
    Scaling(RunArgs),
    /// Print the default config of an experiment.
    EmitConfig { experiment: String },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Config file (TOML), or a manifest.json written by an earlier run.
    config: PathBuf,
    /// Output directory; overrides the environment and the config.
    outdir: Option<PathBuf>,
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|x| x == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
        let cfg = v.get("config").ok_or_else(|| CliError::Schema("manifest has no `config` entry".into()))?;
        return serde_json::from_value(cfg.clone()).map_err(|e| CliError::Schema(e.to_string()));
    }
    ExperimentConfig::from_toml(&text)
}

fn output_dir(cfg: &ExperimentConfig, cli: Option<PathBuf>) -> PathBuf {
    cli.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()))
}

fn run(experiment: Experiment, args: RunArgs) -> Result<PathBuf, CliError> {
    let cfg = load(&args.config)?;
    if cfg.experiment != experiment {
        return Err(CliError::Schema(format!(
            "config is for `{}`, not `{}`",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    let cfg = cfg.resolved();
    cfg.validate()?;
    let dir = output_dir(&cfg, args.outdir);
    let mut done = run::execute(&cfg)?;
    let mut files = done.artifacts.names();
    files.extend(["resolved_config.toml".to_string(), "manifest.json".to_string()]);
    let manifest = json!({
        "experiment": cfg.experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "derived": done.derived,
        "results": done.results,
        "files": files,
    });
    done.artifacts.add("resolved_config.toml", cfg.to_toml());
    done.artifacts.add("manifest.json", serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n");
    done.artifacts.write(&dir)?;
    Ok(dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::EmitConfig { experiment } => {
            return match Experiment::parse(&experiment) {
                Some(e) => {
                    print!("{}", default_config(e).to_toml());
                    ExitCode::SUCCESS
                }
                None => report(&CliError::Schema(format!("unknown experiment `{experiment}`"))),
            };
        }
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Generate(a) => (Experiment::Generate, a),
        Command::Copies(a) => (Experiment::Copies, a),
        Command::Swap(a) => (Experiment::Swap, a),
        Command::Scaling(a) => (Experiment::Scaling, a),
    };
    match run(experiment, args) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.code() }));
    ExitCode::from(e.code())
}
