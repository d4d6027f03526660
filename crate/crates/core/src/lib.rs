//! Analytics core for 4H range governance in perpetual-futures markets.
//!
//! Everything in this crate is pure computation over immutable records: the
//! data model and its invariants, the validation pipeline, four metric
//! families (structural, cost, positioning, liquidity), the hypothesis
//! engine, the regime advisor, and a deterministic synthetic-panel
//! generator with a batch backtester. File formats, reports and the CLI
//! live in the `rangegov` crate.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backtest;
pub mod config;
pub mod cost;
pub mod error;
pub mod fixed;
pub mod hypothesis;
pub mod ingest;
pub mod liquidity;
pub mod model;
pub mod positioning;
pub mod quality;
pub mod regime;
pub mod stats;
pub mod structural;
pub mod synth;

pub use config::Config;
pub use error::{Error, Result};
pub use fixed::Fixed;
pub use model::{
    BookLevel, BookSnapshot, Candle4H, FundingRecord, LiquidationEvent, LiquidationSide, OpenInterestRecord, Panel,
    RangeDefinition, Timestamp, BAR_SECONDS,
};
