//! Persistent memo store for response evaluations.
//!
//! The cache is a pure accelerator: every value it returns was produced by
//! the same deterministic evaluator, so results are bit-identical with the
//! cache enabled or disabled. Keys quantize `(r_tilde, nu)` to 12
//! significant digits, comfortably below any physically meaningful
//! difference and immune to formatting noise.
//!
//! The on-disk format is a line-oriented text table:
//!
//! ```text
//! strqfi-response-cache format=1 scheme=1
//! # component r_tilde nu value dvalue_dnu trunc_error quad_error
//! radial 5.00000000000e-1 1.50000000000e0 3.55952879718e-1 - 1e-12 3e-13
//! ```
//!
//! `-` marks a missing derivative. Values are written in shortest
//! round-trip scientific notation, so a save/load cycle preserves bits.
//! A header with a different `format` is rejected; a different `scheme`
//! (numerical-scheme version, see [`SCHEME_VERSION`]) silently yields an
//! empty cache because the stored values may no longer match what the
//! evaluator would produce.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::RwLock;

use super::{Component, ResponseError, ResponseValue, SCHEME_VERSION};

const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "strqfi-response-cache";

type Key = (Component, String, String);

/// Thread-safe in-memory memo table for `(component, r_tilde, nu)` response
/// evaluations, with optional persistence.
#[derive(Debug, Default)]
pub struct ResponseCache {
    map: RwLock<HashMap<Key, ResponseValue>>,
}

fn quantize(v: f64) -> String {
    format!("{v:.11e}")
}

impl ResponseCache {
    /// Creates an empty cache.
    pub fn new() -> Self {
        ResponseCache::default()
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(super) fn get(&self, component: Component, r_tilde: f64, nu: f64) -> Option<ResponseValue> {
        let key = (component, quantize(r_tilde), quantize(nu));
        self.map
            .read()
            .expect("cache lock poisoned")
            .get(&key)
            .copied()
    }

    pub(super) fn put(&self, component: Component, r_tilde: f64, nu: f64, value: ResponseValue) {
        let key = (component, quantize(r_tilde), quantize(nu));
        self.map
            .write()
            .expect("cache lock poisoned")
            .insert(key, value);
    }

    /// Loads a cache file. A missing file is not an error (returns an empty
    /// cache), and so is a file written under a different numerical-scheme
    /// version; a malformed file is.
    pub fn load(path: &Path) -> Result<Self, ResponseError> {
        let err = |what: String| ResponseError::Cache {
            path: path.display().to_string(),
            what,
        };
        if !path.exists() {
            return Ok(ResponseCache::new());
        }
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("empty file".into()))?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some(MAGIC) {
            return Err(err("missing cache header".into()));
        }
        let mut format = None;
        let mut scheme = None;
        for token in tokens {
            if let Some(v) = token.strip_prefix("format=") {
                format = v.parse::<u32>().ok();
            } else if let Some(v) = token.strip_prefix("scheme=") {
                scheme = v.parse::<u32>().ok();
            }
        }
        match format {
            Some(FORMAT_VERSION) => {}
            _ => return Err(err(format!("unsupported cache format (expected {FORMAT_VERSION})"))),
        }
        if scheme != Some(SCHEME_VERSION) {
            return Ok(ResponseCache::new());
        }

        let mut map = HashMap::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 7 {
                return Err(err(format!(
                    "line {}: expected 7 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let component: Component = fields[0]
                .parse()
                .map_err(|e| err(format!("line {}: {e}", lineno + 2)))?;
            let parse = |s: &str| -> Result<f64, ResponseError> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("line {}: bad number '{s}'", lineno + 2)))
            };
            let value = parse(fields[3])?;
            let dvalue_dnu = if fields[4] == "-" {
                None
            } else {
                Some(parse(fields[4])?)
            };
            let trunc_error = parse(fields[5])?;
            let quad_error = parse(fields[6])?;
            map.insert(
                (component, fields[1].to_string(), fields[2].to_string()),
                ResponseValue {
                    value,
                    dvalue_dnu,
                    trunc_error,
                    quad_error,
                },
            );
        }
        Ok(ResponseCache {
            map: RwLock::new(map),
        })
    }

    /// Writes the cache to `path`, entries sorted by key so identical cache
    /// contents always serialize to identical bytes.
    pub fn save(&self, path: &Path) -> Result<(), ResponseError> {
        let err = |what: String| ResponseError::Cache {
            path: path.display().to_string(),
            what,
        };
        let map = self.map.read().expect("cache lock poisoned");
        let mut entries: Vec<(&Key, &ResponseValue)> = map.iter().collect();
        entries.sort_by(|(a, _), (b, _)| {
            (a.0.tag(), a.1.as_str(), a.2.as_str()).cmp(&(b.0.tag(), b.1.as_str(), b.2.as_str()))
        });

        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} format={FORMAT_VERSION} scheme={SCHEME_VERSION}");
        let _ = writeln!(out, "# component r_tilde nu value dvalue_dnu trunc_error quad_error");
        for ((component, r_q, nu_q), v) in entries {
            let dv = match v.dvalue_dnu {
                Some(d) => format!("{d:e}"),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{} {} {} {:e} {} {:e} {:e}",
                component.tag(),
                r_q,
                nu_q,
                v.value,
                dv,
                v.trunc_error,
                v.quad_error
            );
        }
        std::fs::write(path, out).map_err(|e| err(e.to_string()))
    }
}
