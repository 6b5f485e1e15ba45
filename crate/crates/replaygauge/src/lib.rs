//! File formats, experiment orchestration and the command-line pipeline
//! built on `replaygauge-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
