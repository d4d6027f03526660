//! Panel files: JSON with a schema version, optionally carrying the
//! ground truth of the scenario that generated the panel.

use std::fs;
use std::path::Path;

use rangegov_core::synth::GroundTruth;
use rangegov_core::Panel;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PANEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelFile {
    pub schema_version: u32,
    pub panel: Panel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl PanelFile {
    pub fn new(panel: Panel, ground_truth: Option<GroundTruth>) -> Self {
        PanelFile { schema_version: PANEL_SCHEMA_VERSION, panel, ground_truth }
    }

    pub fn read(path: &Path) -> Result<PanelFile> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: PanelFile = serde_json::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))?;
        if f.schema_version != PANEL_SCHEMA_VERSION {
            return Err(Error::schema(path, format!("unsupported schema_version {}", f.schema_version)));
        }
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string(self).map_err(|e| Error::schema(path, e.to_string()))?;
        text.push('\n');
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
