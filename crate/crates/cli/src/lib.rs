//! Command-line front end for sliced independence screening: CSV ingestion,
//! the `screen`, `simulate` and `augment-check` commands, and their reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;

pub use config::{Cli, Command, DEFAULT_SEED, THREADS_ENV};
pub use error::{CliError, Result};

/// Sizes the global worker pool from `SIT_SCREEN_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
