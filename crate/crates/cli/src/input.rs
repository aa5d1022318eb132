//! Parsing of measure arguments.

use std::fs;

use parisi_sphere::{Error, ParisiMeasure, Result, StepCDF};

/// Reads a measure from `@path`, inline JSON (`{"type": "atomic", ...}` or
/// `{"type": "frsb", ...}`) or a jump list `"q1:m1,q2:m2,..."`.
pub fn parse_measure(arg: &str) -> Result<ParisiMeasure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Parse(format!("measure JSON: {e}")));
    }
    let mut jumps = Vec::new();
    for item in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (q, m) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected 'q:m', got '{item}'")))?;
        let q: f64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad location '{q}'")))?;
        let m: f64 = m
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value '{m}'")))?;
        jumps.push((q, m));
    }
    Ok(ParisiMeasure::Atomic(StepCDF::new(jumps)?))
}

/// `"p0,p,a"` for the perturbed pure model.
pub fn parse_perturbation(arg: &str) -> Result<(u32, u32, f64)> {
    let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
    let bad = || Error::Parse(format!("expected 'p0,p,a', got '{arg}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}
