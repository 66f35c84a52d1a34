pub mod commands;
pub mod config;
pub mod error;
pub mod record;

pub use config::{ExperimentConfig, OutputFormat};
pub use error::{CliError, CliResult};
pub use record::ResultRecord;
