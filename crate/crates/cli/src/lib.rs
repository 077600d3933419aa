//! Command-line front end: sampling, verification, diagonal-space tables,
//! cube parametrization and benchmarks.

pub mod commands;
pub mod error;
pub mod pipeline;
pub mod record;

pub use commands::run;
pub use error::{CliError, CliResult};
