use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::io::Table;

/// Digest of one input file.
#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

/// The JSON document every subcommand prints. Maps are `BTreeMap`s and
/// `serde_json` objects are sorted, so the output is key-sorted and stable.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, InputDigest>,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub version: String,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(&mut self, role: &str, table: &Table) {
        self.inputs.insert(role.to_string(), InputDigest { file: table.name.clone(), sha256: table.sha256.clone() });
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.to_string(), to_value(value));
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        // round-trip through Value so nested struct fields are sorted too
        let v = serde_json::to_value(self).map_err(|e| CliError::Input(format!("cannot encode report: {e}")))?;
        serde_json::to_string_pretty(&v).map_err(|e| CliError::Input(format!("cannot encode report: {e}")))
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// JSON has no infinities; they are written as strings.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}
