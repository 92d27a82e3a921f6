//! Batch front end for flexhull: fleet configs in, fit reports and plot data
//! out.

pub mod config;
pub mod run;

pub use config::{ConfigError, Fleet, FleetConfig};
pub use run::RunError;
