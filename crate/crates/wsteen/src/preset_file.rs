//! Field selection: the named presets and `custom:<file>` TOML presentations.
//!
//! ```toml
//! name = "deep"
//! rho_nilpotence = 4
//! classes = ["a"]
//! vanishing = [["a", "a"], ["rho", "a"]]
//! ```

use std::path::Path;

use serde::Deserialize;
use wsteen_core::FieldPreset;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetFile {
    pub name: Option<String>,
    pub rho_nilpotence: u32,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub vanishing: Vec<Vec<String>>,
}

impl PresetFile {
    pub fn parse(text: &str, fallback_name: &str) -> Result<FieldPreset, CliError> {
        let f: PresetFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("preset file: {e}")))?;
        let name = f.name.as_deref().unwrap_or(fallback_name);
        Ok(FieldPreset::custom(name, f.rho_nilpotence, &f.classes, &f.vanishing)?)
    }
}

/// `qcl`, `fq1`, `fq3` or `custom:<file>`.
pub fn resolve_field(field: &str) -> Result<FieldPreset, CliError> {
    if let Some(p) = FieldPreset::by_name(field) {
        return Ok(p);
    }
    let Some(path) = field.strip_prefix("custom:") else {
        return Err(CliError::Usage(format!("unknown field {field:?}; expected qcl, fq1, fq3 or custom:<file>")));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read preset file {path}: {e}")))?;
    let stem = Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
    PresetFile::parse(&text, stem)
}
