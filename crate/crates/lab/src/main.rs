use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use poslab::config::{Experiment, Fallback, OUTPUT_DIR_ENV};
use poslab::{exit, run_experiment, validate, LabError};

#[derive(Parser)]
#[command(
    name = "poslab",
    version,
    about = "Positive-energy localization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List experiments and their keys.
    ListExperiments,
}

fn read(path: &Path) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn list() {
    for e in Experiment::ALL {
        println!("{:<11} {}", e.name(), e.summary());
        for p in e.schema() {
            let d = match p.default {
                Fallback::Required => "required".to_string(),
                Fallback::Given(v) => format!("default {v}"),
                Fallback::Derived => "default auto".to_string(),
            };
            println!("    {:<20} {d}", p.key);
        }
    }
    println!(
        "common keys: experiment, seed (default 0), output_dir (default poslab-out/<experiment>)"
    );
    println!("{OUTPUT_DIR_ENV} overrides output_dir");
}

fn run(command: Command) -> Result<i32, LabError> {
    match command {
        Command::ListExperiments => {
            list();
            Ok(exit::SUCCESS)
        }
        Command::Validate { config } => {
            let (cfg, _) = validate(&read(&config)?)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg.echo()).expect("json")
            );
            Ok(exit::SUCCESS)
        }
        Command::Run { config } => {
            let (mut cfg, _) = validate(&read(&config)?)?;
            cfg.apply_env_override();
            let manifest = run_experiment(&cfg)?;
            for a in &manifest.artifacts {
                println!("{}  {}", a.sha256, cfg.output_dir.join(&a.file).display());
            }
            let mut code = exit::SUCCESS;
            for f in manifest.validity.iter().filter(|f| !f.ok) {
                eprintln!("validity flag {} raised: {}", f.name, f.detail);
                code = exit::HORIZON;
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
