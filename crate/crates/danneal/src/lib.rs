//! File formats, bundled datasets, multi-threaded solving and the command-line
//! front end built on `danneal-core`.

pub mod cli;
pub mod commands;
pub mod datasets;
pub mod error;
pub mod io;
pub mod report;
pub mod solve;

pub use error::{Error, Result};
