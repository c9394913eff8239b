//! Result emission: 12-significant-digit numeric rounding, JSON/CSV
//! rendering, and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

/// Build identifier stamped into every emitted document.
pub const BUILD_ID: &str = env!("SHORTFALL_BUILD_ID");

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Recursively round every number in a JSON tree to 12 significant digits.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return serde_json::Number::from_f64(round_sig(f))
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

/// Render a JSON document with rounded numbers and a trailing newline.
pub fn render_json(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&round_json(value)).expect("valid json");
    text.push('\n');
    text
}

/// Format one CSV cell: numbers at 12 significant digits, strings quoted
/// when they contain separators.
pub fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{}", round_sig(f)),
            _ => n.to_string(),
        },
        Value::String(s) => {
            if s.contains(',') || s.contains('"') || s.contains('\n') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        other => csv_cell(&Value::String(other.to_string())),
    }
}

/// Render rows of (header, cells) into CSV text.
pub fn render_csv(header: &[&str], rows: &[Vec<Value>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    #[allow(clippy::approx_constant)] // the 12-digit roundings are the point
    fn rounding_truncates_to_twelve_digits() {
        assert_eq!(round_sig(0.5 * 2.0f64.sqrt()), 0.707106781187);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1.5), 1.5);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn json_rounding_is_recursive() {
        let v = round_json(json!({"a": [1.0f64 / 3.0], "b": {"c": 2.0f64.sqrt()}}));
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 1.41421356237);
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_cell(&json!("a,b")), "\"a,b\"");
        assert_eq!(csv_cell(&json!(2.0)), "2");
    }
}
