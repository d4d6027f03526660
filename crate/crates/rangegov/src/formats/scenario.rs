//! Scenario scripts (TOML).
//!
//! ```toml
//! name = "h3-confirm"
//! seed = 7
//! price = 30000      # range centre, optional
//!
//! [[segment]]
//! template = "range"
//! bars = 570
//!
//! [[segment]]
//! template = "spike-revert"
//! bars = 30
//! params = { spike_at = 10 }
//! expect = { H3 = "confirmed" }
//! ```
//!
//! Templates: `range`, `compression`, `breakout`, `spike-revert`, `cascade`,
//! `trend`, `noise`. Every segment after the first becomes an evaluation
//! window; `expect` keys are `H1`..`H4` (outcome names) and `regime`.

use std::fs;
use std::path::Path;

use rangegov_core::synth::Scenario;

use crate::error::{Error, Result};

pub fn read(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Scenario> {
    let s: Scenario = toml::from_str(text).map_err(|e| Error::schema(path, e.to_string()))?;
    s.check().map_err(|e| Error::schema(path, e.to_string()))?;
    Ok(s)
}

pub fn render(s: &Scenario) -> Result<String> {
    toml::to_string(s).map_err(|e| Error::Usage(e.to_string()))
}
