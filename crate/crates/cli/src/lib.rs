//! Document handling and commands behind the `fuchsnorm` binary.

pub mod commands;
pub mod document;
pub mod error;
pub mod output;

pub use commands::{run, Command, Outcome, Settings};
pub use document::Document;
pub use error::{CliError, CliResult};
