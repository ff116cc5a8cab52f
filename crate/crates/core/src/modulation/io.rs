use std::io::{BufRead, Write};

use super::ModulationPath;
use crate::error::{Error, Result};

const MAGIC: &str = "# modpath v1";

/// Writes `time value` rows under a `# modpath v1 T=<horizon>` header.
pub fn write_path<W: Write>(path: &ModulationPath, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC} T={:e}", path.horizon())?;
    for (k, v) in path.values().iter().enumerate() {
        writeln!(out, "{:e} {:e}", path.node_time(k), v)?;
    }
    Ok(())
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Reads a path written by [`write_path`]. Times must sit on the uniform grid
/// implied by the header horizon and the row count.
pub fn read_path<R: BufRead>(input: R) -> Result<ModulationPath> {
    let mut lines = input.lines().enumerate();
    let horizon = loop {
        let Some((i, line)) = lines.next() else {
            return parse_err(0, "empty path file");
        };
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some(rest) = trimmed.strip_prefix(MAGIC) else {
            return parse_err(i + 1, format!("expected '{MAGIC} T=<horizon>' header"));
        };
        let Some(t) = rest.trim().strip_prefix("T=") else {
            return parse_err(i + 1, "header is missing T=<horizon>");
        };
        match t.trim().parse::<f64>() {
            Ok(v) => break v,
            Err(e) => return parse_err(i + 1, format!("bad horizon: {e}")),
        }
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split_whitespace();
        let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return parse_err(i + 1, "expected two columns: time value");
        };
        let t: f64 = t
            .parse()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("bad time: {e}") })?;
        let v: f64 = v
            .parse()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("bad value: {e}") })?;
        times.push((i + 1, t));
        values.push(v);
    }
    let path = ModulationPath::from_samples(&values, horizon)?;
    let tol = 1e-9 * horizon;
    for (k, &(line, t)) in times.iter().enumerate() {
        if (t - path.node_time(k)).abs() > tol {
            return parse_err(line, format!("time {t} is not on the uniform grid"));
        }
    }
    Ok(path)
}
