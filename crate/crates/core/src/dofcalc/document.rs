//! JSON document form of a [`SchemeSpec`].

use super::types::{SchemeSpec, SCHEMA_VERSION};
use crate::error::{Error, Result};

pub fn to_json(scheme: &SchemeSpec) -> String {
    serde_json::to_string_pretty(scheme).expect("scheme serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<SchemeSpec> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::MalformedScheme(format!(
                "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
            )))
        }
        None => return Err(Error::MalformedScheme("missing schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedScheme(e.to_string()))
}
