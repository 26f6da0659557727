//! Front end for `evp-core`: problem files, certificates and the four
//! commands behind the `evp` binary.

pub mod certificate;
pub mod commands;
pub mod error;
pub mod problem;

pub use commands::{BackendChoice, Outcome, Settings};
pub use error::{exit, CliError};
