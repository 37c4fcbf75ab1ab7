//! Parsing of swept parameter values and maximize axis specifications.
//!
//! A sweep is either a single value (`0.5`) or a range
//! (`lo:hi:count[:log|lin]`, linear when the spacing token is omitted).
//! An axis spec is `name[:lo:hi[:count[:log|lin]]]`; a bare name selects
//! the built-in search range for that parameter.

use std::f64::consts::PI;

use strqfi::{Axis, Var};

/// Default sample count for ranges that do not specify one.
pub const DEFAULT_COUNT: usize = 400;

pub fn var_name(var: Var) -> &'static str {
    match var {
        Var::RTilde => "r",
        Var::Nu => "nu",
        Var::TauTilde => "tau",
        Var::Theta => "theta",
    }
}

pub fn parse_var(name: &str) -> Result<Var, String> {
    match name {
        "r" => Ok(Var::RTilde),
        "nu" => Ok(Var::Nu),
        "tau" => Ok(Var::TauTilde),
        "theta" => Ok(Var::Theta),
        other => Err(format!(
            "unknown parameter {other:?} (expected r, nu, tau, or theta)"
        )),
    }
}

/// Built-in search range per parameter: `(lo, hi, log)`. The radial
/// distance spans decades, so it defaults to log spacing.
fn default_range(var: Var) -> (f64, f64, bool) {
    match var {
        Var::RTilde => (0.01, 10.0, true),
        Var::Nu => (1.0, 2.5, false),
        Var::TauTilde => (0.0, 20.0, false),
        Var::Theta => (0.0, PI, false),
    }
}

fn parse_f64(var: Var, token: &str) -> Result<f64, String> {
    token
        .parse::<f64>()
        .map_err(|_| format!("{}: not a number: {token:?}", var_name(var)))
}

fn parse_count(var: Var, token: &str) -> Result<usize, String> {
    token
        .parse::<usize>()
        .map_err(|_| format!("{}: not a sample count: {token:?}", var_name(var)))
}

fn parse_spacing(var: Var, token: &str) -> Result<bool, String> {
    match token {
        "log" => Ok(true),
        "lin" => Ok(false),
        other => Err(format!(
            "{}: spacing must be \"log\" or \"lin\", got {other:?}",
            var_name(var)
        )),
    }
}

fn build_axis(var: Var, lo: f64, hi: f64, count: usize, log: bool) -> Result<Axis, String> {
    Axis::new(var, lo, hi, count, log).map_err(|e| e.to_string())
}

/// Parses a `--r`/`--nu`/`--tau`/`--theta` value for the sweep commands.
pub fn parse_sweep(var: Var, spec: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [value] => {
            let v = parse_f64(var, value)?;
            build_axis(var, v, v, 1, false)
        }
        [lo, hi, count] => build_axis(
            var,
            parse_f64(var, lo)?,
            parse_f64(var, hi)?,
            parse_count(var, count)?,
            false,
        ),
        [lo, hi, count, spacing] => build_axis(
            var,
            parse_f64(var, lo)?,
            parse_f64(var, hi)?,
            parse_count(var, count)?,
            parse_spacing(var, spacing)?,
        ),
        _ => Err(format!(
            "{}: expected VALUE or LO:HI:COUNT[:log|lin], got {spec:?}",
            var_name(var)
        )),
    }
}

/// Parses a `--axis` specification for the maximize command.
pub fn parse_axis(spec: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let var = parse_var(parts[0])?;
    let (def_lo, def_hi, def_log) = default_range(var);
    match parts.as_slice() {
        [_] => build_axis(var, def_lo, def_hi, DEFAULT_COUNT, def_log),
        [_, lo, hi] => build_axis(
            var,
            parse_f64(var, lo)?,
            parse_f64(var, hi)?,
            DEFAULT_COUNT,
            def_log,
        ),
        [_, lo, hi, count] => build_axis(
            var,
            parse_f64(var, lo)?,
            parse_f64(var, hi)?,
            parse_count(var, count)?,
            def_log,
        ),
        [_, lo, hi, count, spacing] => build_axis(
            var,
            parse_f64(var, lo)?,
            parse_f64(var, hi)?,
            parse_count(var, count)?,
            parse_spacing(var, spacing)?,
        ),
        _ => Err(format!(
            "axis: expected NAME[:LO:HI[:COUNT[:log|lin]]], got {spec:?}"
        )),
    }
}
