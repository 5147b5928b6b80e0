//! Experiment configuration files: JSON with a fixed schema, plus
//! `key=value` dot-path overrides from the command line.
//!
//! Unknown keys are rejected so a typo never silently falls back to a
//! default. Complex values are two-element arrays `[re, im]`.

use std::path::Path;

use serde_json::Value;

use crate::error::{RadarError, Result};
use crate::harness::ExperimentConfig;

/// Loads a config file and applies overrides in order.
pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RadarError::Usage(format!("cannot read config file {}: {e}", path.display()))
    })?;
    parse(&text, overrides)
}

/// Parses config JSON and applies `key=value` overrides.
pub fn parse(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| RadarError::Config(format!("config is not valid JSON: {e}")))?;
    if !value.is_object() {
        return Err(RadarError::Config("config root must be a JSON object".into()));
    }
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let cfg: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| RadarError::Usage(format!("config error: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies one `key=value` override; dots in the key descend into nested
/// objects. The value is parsed as JSON, falling back to a plain string.
fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        RadarError::Usage(format!("override '{spec}' must have the form key=value"))
    })?;
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        let obj = cur.as_object_mut().ok_or_else(|| {
            RadarError::Usage(format!("override '{key}': '{part}' is not an object"))
        })?;
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let leaf = parts[parts.len() - 1];
    let obj = cur.as_object_mut().ok_or_else(|| {
        RadarError::Usage(format!("override '{key}' does not address an object field"))
    })?;
    obj.insert(leaf.to_string(), parsed);
    Ok(())
}

/// The full effective config as pretty JSON, every parameter explicit.
pub fn to_pretty_json(cfg: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}
