//! File formats, configuration, fold runner and reports around [`anomap_core`].

pub mod config;
pub mod dataset;
pub mod external;
pub mod format;
pub mod report;
pub mod runner;

pub use config::{ConfigError, DataSource, ModelKind, RunConfig};
pub use runner::{ablate, run, write_run, RunOptions, RunReport};
