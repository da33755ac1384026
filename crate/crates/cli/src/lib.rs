//! Ingestion, reporting and rendering around `scidyn-core`: CSV readers and
//! writers, deterministic JSON, SVG animation, and the `scidyn` command line.

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod json;
pub mod render;

pub use error::{IoError, IoResult};
