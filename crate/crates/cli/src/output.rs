use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use crate::Format;

/// Opens an input file, reporting a missing one as "file not found".
pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => anyhow!("file not found: {}", path.display()),
        _ => anyhow!("cannot open {}: {e}", path.display()),
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    io::Read::read_to_string(&mut open(path)?, &mut s).with_context(|| format!("reading {}", path.display()))?;
    Ok(s)
}

/// Writes `text` to `path`, or to stdout when there is no path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Serializes flat records as CSV (header from the first record) or as a
/// pretty JSON array.
pub fn render<T: Serialize>(records: &[T], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(records)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r)?;
            }
            Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
        }
    }
}
