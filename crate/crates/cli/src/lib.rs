//! Scenario configuration and subcommand drivers of the `cosserat` binary.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{exit_code, VerificationFailed};
pub use config::{ConfigError, InitialCondition, ScenarioConfig};
