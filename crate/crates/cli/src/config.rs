//! Config ingestion: JSON with exact rationals accepted as "p/q" strings,
//! field-path error messages, and a stable hash for output headers.

use serde_json::Value;
use std::fmt;

/// Errors carrying the process exit code semantics: config problems exit
/// with 2, computation failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {}", m),
            CliError::Compute(m) => write!(f, "computation failed: {}", m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<polycyclic_core::Error> for CliError {
    fn from(e: polycyclic_core::Error) -> CliError {
        CliError::Compute(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn field<'a>(v: &'a Value, path: &str) -> CliResult<&'a Value> {
    v.get(path)
        .ok_or_else(|| CliError::Config(format!("missing field `{}`", path)))
}

pub fn opt_field<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    v.get(path)
}

/// A JSON number, or an exact rational written as a string "p/q".
pub fn as_f64(v: &Value, path: &str) -> CliResult<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::Config(format!("field `{}` is not a finite number", path))),
        Value::String(s) => parse_rational(s)
            .map(|(p, q)| p as f64 / q as f64)
            .ok_or_else(|| {
                CliError::Config(format!("field `{}`: expected a number or \"p/q\"", path))
            }),
        _ => Err(CliError::Config(format!(
            "field `{}`: expected a number or \"p/q\" string",
            path
        ))),
    }
}

/// Exact rational: integer JSON number or "p/q" string; floats rejected
/// so that exactness survives ingestion.
pub fn as_rational(v: &Value, path: &str) -> CliResult<(i64, i64)> {
    match v {
        Value::Number(n) => n.as_i64().map(|p| (p, 1)).ok_or_else(|| {
            CliError::Config(format!(
                "field `{}`: exact coefficients must be integers or \"p/q\" strings",
                path
            ))
        }),
        Value::String(s) => parse_rational(s).ok_or_else(|| {
            CliError::Config(format!("field `{}`: malformed rational \"{}\"", path, s))
        }),
        _ => Err(CliError::Config(format!(
            "field `{}`: expected an integer or \"p/q\" string",
            path
        ))),
    }
}

fn parse_rational(s: &str) -> Option<(i64, i64)> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<i64>().ok().map(|p| (p, 1)),
        Some((p, q)) => {
            let p = p.trim().parse::<i64>().ok()?;
            let q = q.trim().parse::<i64>().ok()?;
            if q == 0 {
                return None;
            }
            Some((p, q))
        }
    }
}

pub fn as_usize(v: &Value, path: &str) -> CliResult<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| {
        CliError::Config(format!("field `{}`: expected a non-negative integer", path))
    })
}

pub fn as_array<'a>(v: &'a Value, path: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| CliError::Config(format!("field `{}`: expected an array", path)))
}

/// FNV-1a over the raw config bytes and the seed: stable across runs.
pub fn config_hash(bytes: &[u8], seed: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes.iter().chain(seed.to_le_bytes().iter()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// 17 significant digits: enough to round-trip any f64, and stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}
