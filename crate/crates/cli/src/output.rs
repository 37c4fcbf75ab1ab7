//! CSV and manifest assembly. Output is built in memory and written in one
//! call so identical invocations produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::errors::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stated in every CSV header so downstream plots can label themselves.
const RATE_NOTE: &str = "rates: gamma_total = f(r_tilde, nu) in units of gamma0; \
     transverse decay exp(-gamma_total*tau/2), longitudinal exp(-gamma_total*tau)";
const UNITS_NOTE: &str =
    "units: r_tilde in c/omega0, tau_tilde in 1/gamma0, fisher dimensionless";

/// Formats a float compactly with full round-trip precision: plain decimal
/// in the human-friendly range, exponent notation outside it.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs();
    if (1e-4..1e16).contains(&mag) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Reconstructs the invocation for the `# command:` header line. The
/// `--cache` and `--jobs` flags are stripped: they cannot change any
/// computed value, and dropping them keeps output byte-identical whether
/// caching or a thread limit is in play.
pub fn command_line(argv: &[String]) -> String {
    let mut kept: Vec<&str> = Vec::new();
    let mut skip_value = false;
    for arg in argv {
        if skip_value {
            skip_value = false;
            continue;
        }
        if arg == "--cache" || arg == "--jobs" {
            skip_value = true;
            continue;
        }
        if arg.starts_with("--cache=") || arg.starts_with("--jobs=") {
            continue;
        }
        kept.push(arg);
    }
    kept.join(" ")
}

fn header_block(argv: &[String]) -> String {
    format!(
        "# strqfi {TOOL_VERSION}\n# command: {}\n# {RATE_NOTE}\n# {UNITS_NOTE}\n",
        command_line(argv)
    )
}

/// Quotes a field if it contains a comma or quote (RFC 4180 style).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Assembles a complete CSV document: comment header, column line, rows.
pub fn csv_document(argv: &[String], columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut doc = header_block(argv);
    doc.push_str(&columns.join(","));
    doc.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        doc.push_str(&line.join(","));
        doc.push('\n');
    }
    doc
}

/// Assembles a `key=value` manifest document.
pub fn manifest_document(entries: &[(String, String)]) -> String {
    let mut doc = String::new();
    for (key, value) in entries {
        doc.push_str(key);
        doc.push('=');
        doc.push_str(value);
        doc.push('\n');
    }
    doc
}

/// Writes to the file, or to stdout when no path is given.
pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}"))),
    }
}
