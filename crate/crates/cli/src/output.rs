use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Numbers in CSV output: 17 significant digits, enough to round-trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let _ = writeln!(text, "{}", row.join(","));
    }
    write_text(path, &text)
}

pub fn error_kind(e: &anyhow::Error) -> &'static str {
    use latcard::Error;
    for cause in e.chain() {
        if cause.is::<std::io::Error>() {
            return "io";
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Io(_) => "io",
                Error::Csv(_) | Error::Row { .. } | Error::Json(_) => "input",
                Error::Config(_) => "config",
                Error::StateSpaceTooLarge { .. } => "capacity",
                _ => "model",
            };
        }
        if cause.is::<serde_json::Error>() {
            return "input";
        }
    }
    "error"
}

pub fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
}
