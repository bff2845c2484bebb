//! Experiment runner for `poslab-core`: strict configs, CSV/JSON artifacts
//! and a manifest with content digests.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use experiments::Plan;
pub use output::{Artifacts, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigError),

    /// Parameters parsed but rejected by the experiment.
    #[error("{experiment}: invalid parameters: {source}")]
    Invalid {
        experiment: Experiment,
        source: poslab_core::Error,
    },

    #[error("{experiment}: {source}")]
    Runtime {
        experiment: Experiment,
        source: poslab_core::Error,
    },

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const RUNTIME: i32 = 2;
    pub const HORIZON: i32 = 3;
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Invalid { .. } => exit::VALIDATION,
            Self::Runtime { .. } | Self::Io { .. } => exit::RUNTIME,
        }
    }
}

/// Parses the config and checks all parameters against the experiment.
pub fn validate(text: &str) -> Result<(ExperimentConfig, Plan), LabError> {
    let cfg = parse_config(text)?;
    let plan = Plan::prepare(&cfg).map_err(|source| LabError::Invalid {
        experiment: cfg.experiment,
        source,
    })?;
    Ok((cfg, plan))
}

/// Runs the experiment in memory without touching the filesystem.
pub fn compute_artifacts(cfg: &ExperimentConfig) -> Result<Artifacts, LabError> {
    let plan = Plan::prepare(cfg).map_err(|source| LabError::Invalid {
        experiment: cfg.experiment,
        source,
    })?;
    let mut out = Artifacts::new();
    plan.execute(&mut out).map_err(|source| LabError::Runtime {
        experiment: cfg.experiment,
        source,
    })?;
    Ok(out)
}

/// Runs the experiment and writes its artifacts and `manifest.json` into
/// `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest, LabError> {
    let start = Instant::now();
    let artifacts = compute_artifacts(cfg)?;
    let io = |source| LabError::Io {
        path: cfg.output_dir.clone(),
        source,
    };
    let entries = output::write_artifacts(&cfg.output_dir, &artifacts).map_err(io)?;
    let manifest = RunManifest {
        experiment: cfg.experiment.name().to_string(),
        config: cfg.echo(),
        output_dir: cfg.output_dir.clone(),
        artifacts: entries,
        duration_seconds: start.elapsed().as_secs_f64(),
        validity: artifacts.flags().to_vec(),
    };
    output::write_manifest(&cfg.output_dir, &manifest).map_err(io)?;
    Ok(manifest)
}
