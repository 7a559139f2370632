// SPDX-License-Identifier: Apache-2.0

//! Scenario files in, CSV/JSON tables out.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod units;

use std::path::{Path, PathBuf};

pub use config::{parse, ConfigError, Scenario};
pub use run::{execute, resolve, RunSummary};
pub use sweep::{execute_sweep, SweepOutcome};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] cavity_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} sweep points failed")]
    Sweep { failed: usize, total: usize },
}

impl RunError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), source }
    }

    /// 1 I/O, 2 invalid input, 3 solver failure, 4 partial sweep.
    pub fn exit_code(&self) -> i32 {
        use cavity_core::Error as E;
        match self {
            RunError::Io { .. } => 1,
            RunError::Config(_) | RunError::Usage(_) => 2,
            RunError::Core(E::Parameter(_) | E::Domain(_) | E::Range(_)) => 2,
            RunError::Core(_) => 3,
            RunError::Sweep { .. } => 4,
        }
    }
}

/// Parse a scenario file, prefixing diagnostics with its path.
pub fn load(path: &Path) -> Result<Scenario, RunError> {
    load_with(path, true)
}

pub fn load_with(path: &Path, require_outputs: bool) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    config::parse_with(&text, require_outputs).map_err(|e| ConfigError { line: None, message: format!("{}: {e}", path.display()) }.into())
}
