//! Configuration-driven experiments for the `neurohom` crate: single
//! heterogeneous and homogenized solves, scale sweeps with two-scale pairing
//! reports, and the verification and oracle suites.

pub mod config;
pub mod fixtures;
pub mod report;
pub mod run;
pub mod validate;
pub mod verify;

use std::path::PathBuf;

pub use config::{ExperimentConfig, IntegratorChoice, Mode};
pub use run::{run, RunOptions, SweepResult};
pub use validate::validate;

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("at eps = {eps}: {source}")]
    Solve {
        eps: f64,
        #[source]
        source: neurohom::Error,
    },
    #[error(transparent)]
    Core(#[from] neurohom::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Exit status of a run: success, or failed checks with their descriptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed(Vec<String>),
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_pass() {
            0
        } else {
            1
        }
    }
}

/// Where artifacts of a run go: the `--out` override or the configured directory.
pub fn output_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.clone())
}
