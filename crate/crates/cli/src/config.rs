//! Plain-text `key = value` configuration files. Keys mirror the long flag
//! names (`system`, `algorithm`, `order`, `p`, `q`, `step`, `tol`, `time`,
//! `ic`, `part`, `subdiv-b`, `subdiv-m`, `subdiv-n`, `threads`, `min-step`,
//! `max-step`, `param.<name>`); values given on the command line win.

use std::collections::HashMap;

pub type FileConfig = HashMap<String, String>;

pub fn load(path: &str) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    parse(&text).map_err(|e| format!("{path}: {e}"))
}

pub fn parse(text: &str) -> Result<FileConfig, String> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value, got {raw:?}", lineno + 1));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Resolve an option: explicit flag, then config file, then none.
pub fn resolve<T: Clone>(
    flag: &Option<T>,
    cfg: &FileConfig,
    key: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Option<T>, String> {
    if let Some(v) = flag {
        return Ok(Some(v.clone()));
    }
    match cfg.get(key) {
        Some(raw) => match parse(raw) {
            Some(v) => Ok(Some(v)),
            None => Err(format!("config key {key}: cannot parse {raw:?}")),
        },
        None => Ok(None),
    }
}
