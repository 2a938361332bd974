use std::io::Write;
use std::path::Path;

use assurekit::model::{ConstantSet, Model, Value};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::internal(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Print to stdout, or write to `out` when given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `NAME=VALUE`: `true`/`false`, an integer, or a decimal.
pub fn parse_const(spec: &str) -> Result<(String, Value), CliError> {
    let (name, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("--const expects NAME=VALUE, got `{spec}`")))?;
    let (name, raw) = (name.trim(), raw.trim());
    if name.is_empty() {
        return Err(CliError::input(format!("--const `{spec}` has no name")));
    }
    let value = match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match raw.parse::<i64>() {
            Ok(i) => Value::Int(i),
            Err(_) => raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Value::Double)
                .ok_or_else(|| CliError::input(format!("--const {name}: `{raw}` is not a number or boolean")))?,
        },
    };
    Ok((name.to_string(), value))
}

/// A constants file: either a plain `{name: value}` object or calibrate
/// output, whose `constants` member is used.
pub fn load_constants(path: &Path) -> Result<ConstantSet, CliError> {
    let text = read(path)?;
    let bad = |e: serde_json::Error| CliError::input(format!("{}: {e}", path.display()));
    let json: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    let body = match json.get("constants") {
        Some(inner) if inner.is_object() => inner.clone(),
        _ => json,
    };
    serde_json::from_value(body).map_err(bad)
}

/// Model-file defaults, overridden by the constants file (names the model
/// does not declare are skipped), overridden by `--const` (unknown names
/// are an error).
pub fn resolve_constants(
    model: &Model,
    file: Option<&Path>,
    cli: &[String],
) -> Result<ConstantSet, CliError> {
    let declared = |name: &str| model.constants.iter().any(|c| c.name == name);
    let mut set = ConstantSet::new();
    if let Some(path) = file {
        for (name, v) in load_constants(path)?.iter() {
            if declared(name) {
                set.insert(name, v);
            }
        }
    }
    for spec in cli {
        let (name, v) = parse_const(spec)?;
        if !declared(&name) {
            return Err(CliError::input(format!("--const: model declares no constant `{name}`")));
        }
        set.insert(name, v);
    }
    Ok(set)
}
