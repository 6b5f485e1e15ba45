//! Algorithms for turning music listening durations and replays into
//! implicit feedback, training collaborative-filtering recommenders on it,
//! post-filtering recommendation lists and evaluating them with
//! criterion-specific MAP@k.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiment
//! orchestration and the command line live in the `replaygauge` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod error;
pub mod eval;
pub mod event;
pub mod matrix;
pub mod postfilter;
pub mod recommend;
pub mod rng;
pub mod signals;
pub mod synth;

pub use error::Error;
pub use event::{DatasetSplit, EventLog, ListeningEvent, TrackId, UserId};
pub use matrix::InteractionMatrix;
pub use signals::{InteractionSummary, RatingFunction, RatingTriple, SummaryTable, TrainingMode};

/// Events shorter than this many seconds are skips; anything at or above is a stream.
pub const STREAM_THRESHOLD_SECS: u32 = 30;
