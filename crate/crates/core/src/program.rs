//! Parsing of named programs such as `rotating(2.0)` used by configuration files.

use crate::error::{Error, Result};

/// Splits `name(a, b, c)` into its name and numeric arguments. A bare name has no arguments.
pub fn parse_call(spec: &str) -> Result<(String, Vec<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        if spec.is_empty() || !spec.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::UnknownProgram(spec.to_string()));
        }
        return Ok((spec.to_string(), Vec::new()));
    };
    if !spec.ends_with(')') {
        return Err(Error::UnknownProgram(spec.to_string()));
    }
    let name = spec[..open].trim().to_string();
    let inner = spec[open + 1..spec.len() - 1].trim();
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::UnknownProgram(spec.to_string()))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok((name, args))
}
