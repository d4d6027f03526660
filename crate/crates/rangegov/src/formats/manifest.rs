//! Dataset manifest (TOML). Paths are relative to the manifest's directory.
//!
//! ```toml
//! instrument = "BTC-PERP"
//! funding = ["funding.csv"]
//! oi = "oi.csv"
//! books = "books.txt"
//!
//! [[spot]]
//! exchange = "alpha"
//! path = "spot_alpha.csv"
//! trailing_volume_usd = 2.1e9
//!
//! [[liquidations]]
//! path = "liq_exchange.csv"
//! source = "exchange"
//! authoritative = true
//!
//! [config]
//! "funding_rate_magnitude.elevated" = 0.0005
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotSource {
    pub exchange: String,
    pub path: PathBuf,
    /// Trailing USD volume used to pick the top venues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trailing_volume_usd: Option<f64>,
    /// Volume rank, 1 = largest; used when volumes are not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiquidationSource {
    pub path: PathBuf,
    #[serde(default)]
    pub source: String,
    /// The source preferred when several report the same events.
    #[serde(default)]
    pub authoritative: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub instrument: String,
    #[serde(default)]
    pub spot: Vec<SpotSource>,
    #[serde(default)]
    pub funding: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oi: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub books: Option<PathBuf>,
    #[serde(default)]
    pub liquidations: Vec<LiquidationSource>,
    #[serde(default)]
    pub config: BTreeMap<String, f64>,
    #[serde(default)]
    pub annotations: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::schema(path, e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `p` resolved against the manifest's directory.
pub fn resolve(manifest: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(p)
    }
}
