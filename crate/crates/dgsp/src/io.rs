//! File helpers that attach paths to every error.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a JSON document; syntax errors carry line and column.
pub fn parse_json(path: &Path, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.into(),
        location: format!("line {} column {}", e.line(), e.column()),
        message: strip_position(&e.to_string()),
    })
}

pub fn read_json(path: &Path) -> Result<Value> {
    parse_json(path, &read_text(path)?)
}

/// Reads a typed document. Type errors report the line and column.
pub fn read_typed<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        location: format!("line {} column {}", e.line(), e.column()),
        message: strip_position(&e.to_string()),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("in-memory values serialize");
    text.push('\n');
    write_text(path, &text)
}

/// Single-line JSON, for large numeric documents.
pub fn write_json_compact<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value).expect("in-memory values serialize");
    text.push('\n');
    write_text(path, &text)
}
