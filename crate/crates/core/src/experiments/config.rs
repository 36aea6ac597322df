//! TOML configuration files and parameter overrides.
//!
//! A configuration file is a flat table whose keys are the fields of
//! [`ScenarioConfig`]; missing keys keep the hall defaults.
//!
//! ```toml
//! n = 21
//! theta_m = 0.5235987755982988
//! eta = 0.5
//! scenario = "center_rx"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::monte_carlo::ScenarioConfig;

/// Parameter name to value, applied on top of a base configuration.
pub type Overrides = BTreeMap<String, Value>;

fn schema_error(e: impl std::fmt::Display) -> Error {
    let msg = e.to_string();
    // serde reports the offending key in backticks
    let field = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<file>".to_string());
    Error::Config {
        field,
        message: msg.trim().to_string(),
    }
}

/// Parses and validates a configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(schema_error)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config_str(&read(path)?)
}

/// Reads the keys of a configuration file without applying defaults.
pub fn parse_overrides(path: &Path) -> Result<Overrides> {
    let text = read(path)?;
    let table: toml::Table = toml::from_str(&text).map_err(schema_error)?;
    let map: Overrides = table
        .into_iter()
        .map(|(k, v)| Ok((k, serde_json::to_value(v).map_err(schema_error)?)))
        .collect::<Result<_>>()?;
    // reject unknown keys and bad values up front
    apply_overrides(&ScenarioConfig::default(), &map)?;
    Ok(map)
}

/// Returns `base` with every key of `overrides` replaced, validated.
pub fn apply_overrides(base: &ScenarioConfig, overrides: &Overrides) -> Result<ScenarioConfig> {
    let mut v = serde_json::to_value(base).map_err(schema_error)?;
    let obj = v.as_object_mut().expect("config serializes to an object");
    for (k, val) in overrides {
        if !obj.contains_key(k) {
            return Err(Error::Config {
                field: k.clone(),
                message: "unknown parameter".into(),
            });
        }
        obj.insert(k.clone(), val.clone());
    }
    let cfg: ScenarioConfig = serde_json::from_value(v).map_err(schema_error)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Sets one numeric parameter by name.
pub fn with_parameter(base: &ScenarioConfig, name: &str, value: f64) -> Result<ScenarioConfig> {
    let v = match name {
        "n" | "replications" | "seed" => {
            if !(value >= 0.0 && value.fract() == 0.0) {
                return Err(Error::Config {
                    field: name.to_string(),
                    message: format!("value {value} is not a nonnegative integer"),
                });
            }
            Value::from(value as u64)
        }
        _ => Value::from(value),
    };
    apply_overrides(base, &Overrides::from([(name.to_string(), v)]))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
