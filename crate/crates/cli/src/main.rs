use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rotor_caustics::{exit_code, parse_config, run, Mode};

/// Kicked-rotor caustics near quantum resonance.
#[derive(Debug, Parser)]
#[command(name = "rotor-caustics", version)]
struct Cli {
    mode: Mode,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set K=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (overrides the `workers` key).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = parse_config(cli.mode, cli.config.as_deref(), &cli.sets, cli.workers, cli.out)
        .map_err(anyhow::Error::from)
        .and_then(|config| run(&config));
    match result {
        Ok(manifest) => {
            println!(
                "{} finished in {:.2}s, {} files",
                manifest.mode,
                manifest.duration_seconds,
                manifest.files.len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
