//! Config files: TOML whose numeric leaves are threshold keys, either
//! quoted flat (`"wash_trading.max_body" = 0.0005`) or nested as tables.

use std::fs;
use std::path::{Path, PathBuf};

use rangegov_core::Config;

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "RG_CONFIG";

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<(String, f64)>) -> std::result::Result<(), String> {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
            Ok(())
        }
        toml::Value::Float(f) => {
            out.push((prefix.to_string(), *f));
            Ok(())
        }
        toml::Value::Integer(i) => {
            out.push((prefix.to_string(), *i as f64));
            Ok(())
        }
        _ => Err(format!("`{prefix}` is not a number")),
    }
}

/// Key/value pairs from a config file's text.
pub fn parse(text: &str) -> std::result::Result<Vec<(String, f64)>, String> {
    let v: toml::Value = text.parse::<toml::Table>().map_err(|e| e.to_string())?.into();
    let mut out = Vec::new();
    flatten("", &v, &mut out)?;
    Ok(out)
}

fn apply_file(cfg: &mut Config, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs = parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for (k, v) in pairs {
        cfg.set(&k, v).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Parse `key=value`.
pub fn parse_override(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("override `{s}`: value is not a number")))?;
    Ok((k.trim().to_string(), v))
}

/// Defaults, then the file named by `--config` (or `RG_CONFIG` when no flag
/// is given), then `extra` pairs, then `--set` overrides.
pub fn load(flag: Option<&Path>, extra: &[(String, f64)], sets: &[String]) -> Result<Config> {
    let mut cfg = Config::default();
    let env = std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(path) = flag.map(Path::to_path_buf).or(env) {
        apply_file(&mut cfg, &path)?;
    }
    for (k, v) in extra {
        cfg.set(k, *v).map_err(|e| Error::Config(e.to_string()))?;
    }
    for s in sets {
        let (k, v) = parse_override(s)?;
        cfg.set(&k, v).map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(cfg)
}

/// The effective config as flat TOML.
pub fn render(cfg: &Config) -> String {
    let mut s = String::new();
    for (k, v) in cfg.entries() {
        s.push_str(&format!("\"{k}\" = {v:?}\n"));
    }
    s
}
