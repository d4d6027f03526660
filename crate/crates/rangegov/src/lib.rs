//! File formats, reports, plots and the `rangegov` command line, built on
//! the `rangegov-core` analytics crate.
//!
//! The flow is ingest (manifest of CSV and book files into a checked panel),
//! then metrics, hypotheses and regime reports over that panel. `synth` and
//! `backtest` produce and score scripted panels with known outcomes.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod metrics;
pub mod plot;
pub mod report;

pub use error::{Error, Result};
