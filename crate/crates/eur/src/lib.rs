//! Command-line side of the energy-time uncertainty toolkit: configuration,
//! file formats and the `certify`, `fig1`, `sweep` and `continuum` commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use io::Format;
pub use run::{Options, Outcome};
