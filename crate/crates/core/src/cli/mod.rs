//! Configuration-driven experiment runner behind the `ris-energy` binary.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::json;

pub use config::{Experiment, ExperimentConfig, Format};
pub use experiments::{run_experiment, Report};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] Error),
    #[error("optimization infeasible: {source}\n{report}")]
    Infeasible { source: Error, report: String },
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Field { .. } => 2,
            _ => 1,
        }
    }
}

/// Crate version, with `git describe` output when built from a checkout.
pub fn version() -> String {
    match option_env!("RIS_ENERGY_GIT_DESCRIBE") {
        Some(d) => format!("{} ({d})", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ris-energy", version, about = "RIS subarray SNR and UE energy experiments")]
pub struct Args {
    /// snr-vs-N, energy-surface, optimize, payload-sweep, energy-vs-N or mc-verify
    pub experiment: Experiment,
    #[arg(long)]
    pub config: PathBuf,
    /// Main output file; the JSON sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub output: PathBuf,
    pub sidecar: PathBuf,
    pub report: Report,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Applies command-line overrides to the file contents.
pub fn resolve(args: &Args, mut config: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    if let Some(e) = config.run.experiment {
        if e != args.experiment {
            return Err(CliError::Field {
                field: "run.experiment".into(),
                reason: format!("config is for `{e}` but `{}` was requested", args.experiment),
            });
        }
    }
    config.run.experiment = Some(args.experiment);
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.run.trials = trials;
    }
    if let Some(f) = args.format {
        config.run.format = f.into();
    }
    if let Some(t) = args.threads {
        config.run.threads = Some(t);
    }
    if let Some(out) = &args.out {
        config.run.output = Some(out.to_string_lossy().into_owned());
    }
    Ok(config)
}

/// Runs the experiment and writes the table and its sidecar.
pub fn execute(experiment: Experiment, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let run = || run_experiment(experiment, config);
    let report = match config.run.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Output(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let format = config.run.format;
    let output = match &config.run.output {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(format!("{}.{}", experiment.name(), format.extension())),
    };
    let sidecar = output::sidecar_path(&output);
    let resolved = toml::Value::try_from(config).map_err(|e| CliError::Output(e.to_string()))?;
    let meta = json!({
        "experiment": experiment.name(),
        "version": version(),
        "format": format,
        "output": output.file_name().map(|n| n.to_string_lossy().into_owned()),
        "rows": report.table.len(),
        "config": output::toml_to_json(&resolved),
        "summary": report.summary,
    });
    output::write_atomic(&output, &report.table.render(format)?)?;
    output::write_atomic(&sidecar, &output::pretty(&meta)?)?;
    Ok(Outcome {
        output,
        sidecar,
        report,
    })
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let result = load_config(&args.config)
        .and_then(|c| resolve(&args, c))
        .and_then(|c| execute(args.experiment, &c));
    match result {
        Ok(outcome) => {
            eprintln!(
                "wrote {} and {}",
                outcome.output.display(),
                outcome.sidecar.display()
            );
            if outcome.report.passed {
                0
            } else {
                eprintln!("error: {}", outcome.report.summary);
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
