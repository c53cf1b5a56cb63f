//! File formats, reports and the command line around `tabgen-core`.

pub use tabgen_core as core;

pub mod charts;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod report;
pub mod schema_file;
pub mod tune;

pub use error::{Error, Result};
