use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dhj::experiment::{exit_code, run, sweep, write_error, ErrorRecord, ExperimentConfig};
use dhj::Error;

/// Experiment runner for perturbed diffusive Hamilton-Jacobi solutions.
#[derive(Parser)]
#[command(name = "dhj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = "DHJ_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
    },
    /// Run one experiment per value of a numeric config field.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated numbers; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, env = "DHJ_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Concurrent sweep entries.
        #[arg(long, env = "DHJ_WORKERS", default_value_t = 1)]
        workers: usize,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn parse_values(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{s}` is not a number")))
        })
        .collect()
}

fn load(path: &Path, output_dir: Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("{e}"),
    }
}

fn fail(err: &Error, config: Option<&ExperimentConfig>) -> ExitCode {
    let record = ErrorRecord::new(err, config.and_then(|c| c.hash().ok()));
    if let Some(c) = config {
        let _ = write_error(&c.output_dir, &record);
    }
    match serde_json::to_string(&record) {
        Ok(s) => eprintln!("{s}"),
        Err(_) => eprintln!("{err}"),
    }
    ExitCode::from(exit_code(err) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config).and_then(|c| c.validate().map(|()| c)) {
            Ok(c) => {
                print_json(&serde_json::json!({ "valid": true, "kind": c.kind.name(), "config_hash": c.hash().ok() }));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e, None),
        },
        Command::Run { config, output_dir } => {
            let config = match load(&config, output_dir) {
                Ok(c) => c,
                Err(e) => return fail(&e, None),
            };
            // `run` leaves its own error record in the output directory
            match run(&config) {
                Ok(out) => {
                    print_json(&out.summary);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, None),
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            output_dir,
            workers,
        } => {
            let config = match load(&config, output_dir) {
                Ok(c) => c,
                Err(e) => return fail(&e, None),
            };
            let values = match parse_values(&values) {
                Ok(v) => v,
                Err(e) => return fail(&e, Some(&config)),
            };
            match sweep(&config, &axis, &values, workers) {
                Ok(table) => {
                    print!("{}", table.to_csv());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, Some(&config)),
            }
        }
    }
}
