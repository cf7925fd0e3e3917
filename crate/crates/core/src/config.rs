//! Versioned JSON configuration objects.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::gabor::GaborSystem;
use crate::grid::{Grid, GridSpec};
use crate::window::{sample_window, WindowSpec};

pub const SCHEMA_VERSION: &str = "v1";

/// Parses a config whose top level carries `"schema": "v1"`.
pub fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GaborError::Configuration(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| GaborError::Configuration("config must be a JSON object".into()))?;
    match obj.remove("schema") {
        Some(serde_json::Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(other) => {
            return Err(GaborError::Configuration(format!("unsupported schema {other}, expected \"{SCHEMA_VERSION}\"")))
        }
        None => return Err(GaborError::Configuration("missing \"schema\" field".into())),
    }
    serde_json::from_value(value).map_err(|e| GaborError::Configuration(e.to_string()))
}

/// Windows and lattice of a Gabor system. `gamma` defaults to `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub grid: GridSpec,
    pub g: WindowSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<WindowSpec>,
    pub a: f64,
    pub b: f64,
}

impl SystemSpec {
    pub fn gamma(&self) -> WindowSpec {
        self.gamma.unwrap_or(self.g)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::from_spec(&self.grid)
    }

    pub fn build(&self) -> Result<GaborSystem> {
        let grid = self.grid()?;
        GaborSystem::new(sample_window(&self.g, &grid)?, sample_window(&self.gamma(), &grid)?, self.a, self.b)
    }
}
