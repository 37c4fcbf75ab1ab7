//! `--config` file format: one `key = value` binding per line, `#`
//! comments and blank lines ignored. Keys use the long flag names without
//! the leading dashes; bindings override the corresponding flags.

/// Parses the file into bindings in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", lineno + 1));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!(
                "config line {}: empty {}",
                lineno + 1,
                if key.is_empty() { "key" } else { "value" }
            ));
        }
        if entries.iter().any(|(k, _)| k == key) {
            return Err(format!("config line {}: duplicate key {key:?}", lineno + 1));
        }
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bindings_and_skips_comments() {
        let text = "# sweep setup\nr = 0.5\n\nnu=1.5:2:4\nout = run.csv\n";
        let entries = parse(text).unwrap();
        assert_eq!(
            entries,
            vec![
                ("r".to_string(), "0.5".to_string()),
                ("nu".to_string(), "1.5:2:4".to_string()),
                ("out".to_string(), "run.csv".to_string()),
            ]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("just words\n").is_err());
        assert!(parse("= 0.5\n").is_err());
        assert!(parse("r =\n").is_err());
        assert!(parse("r = 1\nr = 2\n").is_err());
    }
}
