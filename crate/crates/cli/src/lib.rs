//! Batch driver for the dynamic user equilibrium solvers: JSON run
//! configurations, artifact writers and the `run`, `validate` and
//! `compare` commands.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use compare::{cmd_compare, CompareReport};
pub use config::{RunConfig, SolverBlock};
pub use error::{CliError, Result};
pub use run::{cmd_run, cmd_validate, execute, RunOptions, RunReport};
