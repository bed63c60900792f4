//! Layered parameters: built-in defaults < config file < command-line flags.
//!
//! A config file is one JSON object. Top-level keys apply to every command
//! that knows them; an object under a command name (e.g. `"irregular": {…}`)
//! applies to that command only and must not contain unknown keys.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::Path;

pub fn load(path: &Path) -> Result<Map<String, Value>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err("config must be a JSON object".into()),
        Err(e) => Err(format!("config parse error: {e}")),
    }
}

fn fields<T: Serialize + Default>() -> Map<String, Value> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Merges `cli` over the config file for `section`; `known` lists every key
/// any command accepts, so stray top-level keys are reported.
pub fn merge<T: Serialize + DeserializeOwned + Default>(
    cli: &T,
    config: Option<&Map<String, Value>>,
    section: &str,
    sections: &[&str],
    known: &[String],
) -> Result<(T, Map<String, Value>), String> {
    let own = fields::<T>();
    let mut out = Map::new();
    if let Some(cfg) = config {
        for (k, v) in cfg {
            if sections.contains(&k.as_str()) {
                if !v.is_object() {
                    return Err(format!("config section `{k}` must be an object"));
                }
                continue;
            }
            if own.contains_key(k) {
                out.insert(k.clone(), v.clone());
            } else if !known.contains(k) && k != "seed" && k != "out" {
                return Err(format!("unknown config key `{k}`"));
            }
        }
        if let Some(Value::Object(sec)) = cfg.get(section) {
            for (k, v) in sec {
                if !own.contains_key(k) {
                    return Err(format!("unknown key `{k}` in config section `{section}`"));
                }
                out.insert(k.clone(), v.clone());
            }
        }
    }
    if let Value::Object(flags) = serde_json::to_value(cli).map_err(|e| e.to_string())? {
        for (k, v) in flags {
            if !v.is_null() {
                out.insert(k, v);
            }
        }
    }
    let merged: T = serde_json::from_value(Value::Object(out.clone())).map_err(|e| format!("config error: {e}"))?;
    Ok((merged, out))
}

pub fn keys_of<T: Serialize + Default>() -> Vec<String> {
    fields::<T>().keys().cloned().collect()
}

/// `seed` and `out` from the config file, if present.
pub fn global_u64(config: Option<&Map<String, Value>>, key: &str) -> Result<Option<u64>, String> {
    match config.and_then(|c| c.get(key)) {
        None => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| format!("config key `{key}` must be a nonnegative integer")),
    }
}

pub fn global_str(config: Option<&Map<String, Value>>, key: &str) -> Result<Option<String>, String> {
    match config.and_then(|c| c.get(key)) {
        None => Ok(None),
        Some(v) => {
            v.as_str().map(|s| Some(s.to_string())).ok_or_else(|| format!("config key `{key}` must be a string"))
        }
    }
}
