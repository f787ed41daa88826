//! Configuration-driven runner for circuit iMPS quench experiments.
//!
//! Each `run` writes `<name>.csv` (a [`table::Table`]) and `<name>.manifest`
//! (a [`manifest::Manifest`]) into the output directory. The directory is
//! taken from `--out`, then the config's `output`, then [`OUTPUT_DIR_ENV`],
//! then the working directory.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod table;
pub mod trajectory;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QMPS_OUTPUT_DIR";

/// Paths and numbers of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub table_path: PathBuf,
    pub manifest_path: PathBuf,
    pub total_shots: u64,
    pub results: Vec<(String, f64)>,
}

pub fn output_dir(flag: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn validate(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)?.resolve()
}

/// Runs the experiment in `config_path`. A run that stops early still
/// writes its outputs, flags them in the manifest and returns
/// [`CliError::Partial`].
pub fn run(config_path: &Path, out: Option<&Path>) -> Result<RunSummary> {
    let config = validate(config_path)?;
    let dir = output_dir(out, &config);
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let start = Instant::now();
    let outcome = experiments::execute(&config)?;
    let stem = config.file_stem().to_string();
    let table_path = dir.join(format!("{stem}.csv"));
    let manifest_path = dir.join(format!("{stem}.manifest"));
    outcome.table.write(&table_path)?;
    let manifest = manifest::Manifest {
        config,
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        total_shots: outcome.total_shots,
        failure: outcome.failure.clone(),
        table_file: format!("{stem}.csv"),
        results: outcome.results.clone(),
    };
    manifest.write(&manifest_path)?;
    if let Some(f) = outcome.failure {
        return Err(CliError::Partial(f));
    }
    Ok(RunSummary {
        table_path,
        manifest_path,
        total_shots: outcome.total_shots,
        results: outcome.results,
    })
}

pub fn compare_files(a: &Path, b: &Path, out: &Path) -> Result<compare::CompareReport> {
    let report = compare::compare(&trajectory::read(a)?, &trajectory::read(b)?)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    report.table.write(out)?;
    Ok(report)
}
