//! Scale presets and JSON overrides for command configurations.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// `n = 50, r = 5`, 10 trials per cell.
    Paper,
    /// `n = 20, r = 2`, 5 trials per cell.
    Small,
}

impl Scale {
    pub fn n(self) -> usize {
        match self {
            Scale::Paper => 50,
            Scale::Small => 20,
        }
    }

    pub fn r(self) -> usize {
        match self {
            Scale::Paper => 5,
            Scale::Small => 2,
        }
    }

    pub fn trials(self) -> usize {
        match self {
            Scale::Paper => 10,
            Scale::Small => 5,
        }
    }
}

/// Measurement count `round(ratio * n * r)`.
pub fn measurements(ratio: f64, n: usize, r: usize) -> Result<usize> {
    let m = (ratio * (n * r) as f64).round();
    if !(m >= 1.0) {
        return Err(ExpError::config(format!(
            "m/(nr) = {ratio} gives no measurements"
        )));
    }
    Ok(m as usize)
}

/// Overrides the fields of `defaults` with the keys of a JSON object.
/// Unknown keys are rejected so typos surface as configuration errors.
pub fn merge<T: Serialize + DeserializeOwned>(defaults: T, overrides: Option<&Value>) -> Result<T> {
    let Some(overrides) = overrides else {
        return Ok(defaults);
    };
    let Value::Object(over) = overrides else {
        return Err(ExpError::config("configuration must be a JSON object"));
    };
    let mut base = serde_json::to_value(&defaults)?;
    let Value::Object(fields) = &mut base else {
        return Err(ExpError::config("configuration defaults are not an object"));
    };
    for (key, value) in over {
        if !fields.contains_key(key) {
            let known: Vec<&str> = fields.keys().map(String::as_str).collect();
            return Err(ExpError::config(format!(
                "unknown configuration key {key:?} (expected one of {})",
                known.join(", ")
            )));
        }
        fields.insert(key.clone(), value.clone());
    }
    serde_json::from_value(base).map_err(|e| ExpError::config(format!("bad configuration: {e}")))
}

pub fn read_json(path: &std::path::Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| ExpError::config(format!("{}: {e}", path.display())))
}
