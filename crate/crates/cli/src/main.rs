use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nhband::config::{load_config, Task};
use nhband::run::{execute, manifest, output_dir, write_manifest, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Bands,
    Gaps,
    EpScan,
    Wannier,
    Tb,
    Compare,
    Sweep,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Bands => Task::Bands,
            Command::Gaps => Task::Gaps,
            Command::EpScan => Task::EpScan,
            Command::Wannier => Task::Wannier,
            Command::Tb => Task::Tb,
            Command::Compare => Task::Compare,
            Command::Sweep => Task::Sweep,
        }
    }
}

/// Band structures, exceptional points and Wannier tight-binding models of
/// 1D non-Hermitian periodic potentials.
#[derive(Debug, Parser)]
#[command(name = "nhband", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let task = cli.command.task();
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            let e = RunError::from(e);
            eprintln!("nhband: {}: {e}", cli.config.display());
            if let Some(dir) = &cli.out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = write_manifest(dir, &manifest(task.name(), None, &[], Err(&e), 0.0));
                }
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let dir = output_dir(&cfg, cli.out);
    match execute(&cfg, task, &dir) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nhband: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
