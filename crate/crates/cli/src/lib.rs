//! Batch runner for the `dispersim-core` experiments.
//!
//! Each run reads one TOML section, writes `<name>.csv` and
//! `<name>.manifest.toml` into the output directory, and reports failures as
//! one JSON line with a fixed exit status.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;

pub use config::ConfigFile;
pub use error::{CliError, ErrorKind};
pub use output::{Manifest, Table};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Experiment {
    Kernel,
    Line,
    Halfline,
    Coupled,
    Stepline,
    Star,
    DeltaLine,
    Torus,
    Alphap,
    Fit,
    Vdc,
    Oscint,
    CouplingCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Kernel,
        Experiment::Line,
        Experiment::Halfline,
        Experiment::Coupled,
        Experiment::Stepline,
        Experiment::Star,
        Experiment::DeltaLine,
        Experiment::Torus,
        Experiment::Alphap,
        Experiment::Fit,
        Experiment::Vdc,
        Experiment::Oscint,
        Experiment::CouplingCheck,
    ];

    /// Subcommand and config section name.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kernel => "kernel",
            Experiment::Line => "line",
            Experiment::Halfline => "halfline",
            Experiment::Coupled => "coupled",
            Experiment::Stepline => "stepline",
            Experiment::Star => "star",
            Experiment::DeltaLine => "delta-line",
            Experiment::Torus => "torus",
            Experiment::Alphap => "alphap",
            Experiment::Fit => "fit",
            Experiment::Vdc => "vdc",
            Experiment::Oscint => "oscint",
            Experiment::CouplingCheck => "coupling-check",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub table: Table,
    pub manifest: Manifest,
    pub summary: Option<String>,
}

/// Runs `experiment` as configured in the file at `config_path`.
pub fn run(experiment: Experiment, config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let config = ConfigFile::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    run_config(experiment, &config, base, opts)
}

/// Runs an already parsed config; relative input paths resolve against `base`.
pub fn run_config(
    experiment: Experiment,
    config: &ConfigFile,
    base: &Path,
    opts: &RunOptions,
) -> Result<RunOutcome, CliError> {
    let threads = opts
        .threads
        .or(config.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::config_field("threads", "thread count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config_field("threads", e.to_string()))?;

    let start = Instant::now();
    let outcome = pool.install(|| experiments::execute(experiment, config, base))?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let out_dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out_dir.display())))?;
    let stem = config.name.clone().unwrap_or_else(|| experiment.name().to_owned());
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let manifest_path = out_dir.join(format!("{stem}.manifest.toml"));
    outcome.table.write(&csv_path)?;

    let manifest = Manifest {
        run: output::RunInfo {
            experiment: experiment.name().to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            threads,
            wall_seconds,
            csv: format!("{stem}.csv"),
            rows: outcome.table.rows.len(),
        },
        config: config.restricted_to(experiment),
        diagnostics: outcome.diagnostics.values,
        flags: outcome.diagnostics.flags,
    };
    output::write_file(&manifest_path, &manifest.to_toml())?;
    Ok(RunOutcome {
        csv_path,
        manifest_path,
        table: outcome.table,
        manifest,
        summary: outcome.summary,
    })
}
