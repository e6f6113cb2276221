//! Flat `key = value` text files with `#` comments.

use std::fmt::Display;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

/// Parses `key = value` lines in order. Blank lines and everything after a
/// `#` are ignored. Repeated keys are an error.
pub fn parse<R: BufRead>(source: R) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(line_no, "empty key"));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn write<W: Write, V: Display>(pairs: &[(String, V)], mut sink: W) -> io::Result<()> {
    for (key, value) in pairs {
        writeln!(sink, "{key} = {value}")?;
    }
    sink.flush()
}
