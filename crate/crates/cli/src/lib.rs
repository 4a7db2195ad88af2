//! Library side of the `tprod` binary: configuration files and subcommands.

pub mod commands;
pub mod config;

pub use config::ExperimentConfig;

/// Exit status of a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Invalid parameters or configuration.
    Usage,
    /// A bound was exceeded or a lemma check failed.
    Violation,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Usage => 2,
            Outcome::Violation => 3,
        }
    }
}

pub const SEED_ENV: &str = "TPROD_SEED";
pub const DEFAULT_SEED: u64 = 42;
