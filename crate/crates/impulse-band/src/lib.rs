//! Command-line front end, model files, and Monte Carlo verification for
//! `impulse-band-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod simulate;

pub use config::{ConfigError, ModelConfig};
pub use error::AppError;
pub use simulate::{simulate_dc, SimConfig, SimError, SimEstimate};
