//! Configuration parsing and result serialization.

pub mod config;
pub mod output;
pub mod plot;

pub use config::{load_config, parse_config, ConfigError, ConfigErrors, RunConfig};
pub use output::{emit_results, OutputFormat, Record, ResultsDocument, CSV_HEADER};
