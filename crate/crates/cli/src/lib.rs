//! Configuration, suite orchestration and report emission for the `cvlab`
//! command-line driver.

pub mod config;
pub mod emit;
pub mod suites;

pub use config::{Config, ConfigError, Format};
pub use emit::{emit_report, read_json, render_csv, render_json};
pub use suites::{run_suite, Suite};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{suite} suite, {check}: {source}")]
    Check {
        suite: &'static str,
        check: String,
        #[source]
        source: cvlab::LabError,
    },

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Check { .. } => exit::FAIL,
            Self::Io { .. } => exit::IO,
        }
    }
}

/// Caps the rayon pool at `CVLAB_THREADS` workers when the variable is set.
pub fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("CVLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| ConfigError::Value { key: "CVLAB_THREADS".into(), msg: format!("expected a positive integer, got '{raw}'") })?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
