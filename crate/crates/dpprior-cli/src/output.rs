//! Output plumbing: resolved-config headers, bit-stable CSV, JSON metadata.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

/// 17 significant digits: round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn writer_for(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// CSV with a leading `# {config json}` comment line, a header row, `\n`
/// line endings and '.' decimals.
pub fn write_csv(
    out: &mut dyn Write,
    config: &serde_json::Value,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(out, "# {config}")?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    out.flush()
}

/// Shared metadata block embedded in every JSON output and config comment.
pub fn metadata(config: serde_json::Value, stirling_n_max: Option<usize>) -> serde_json::Value {
    let mut meta = serde_json::json!({
        "dpprior_version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    if let Some(n_max) = stirling_n_max {
        meta["stirling_n_max"] = serde_json::json!(n_max);
    }
    meta
}
