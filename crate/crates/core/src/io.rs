//! Small file helpers shared by the command line front end: `key=value`
//! configuration files and buffered output files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// a repeated key keeps its last value.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {raw:?}", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", n + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<P, F>(path: P, body: F) -> Result<()>
where
    P: AsRef<Path>,
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<P: AsRef<Path>, T: Serialize + ?Sized>(path: P, value: &T) -> Result<()> {
    write_file(path, |w| w.write_all(to_json(value).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values() {
        let m = parse_key_values("# run\nshape = square\nl=-1 # weight\n\nh = 0.1\nl = -0.5\n").unwrap();
        assert_eq!(m["shape"], "square");
        assert_eq!(m["l"], "-0.5");
        assert_eq!(m["h"], "0.1");
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn malformed_line() {
        assert!(matches!(parse_key_values("shape square"), Err(Error::Parse(_))));
        assert!(matches!(parse_key_values("=3"), Err(Error::Parse(_))));
    }
}
