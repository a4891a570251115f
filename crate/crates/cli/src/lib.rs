pub mod commands;
pub mod error;
pub mod output;
pub mod scan;
pub mod spec;
pub mod suite;

pub use error::CliError;
