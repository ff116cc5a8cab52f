use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use super::{Constraints, SpectralField};
use crate::error::{Error, Result};

const MAGIC: &str = "# specfield v1";

fn flags(c: Constraints) -> String {
    let mut parts = Vec::new();
    if c.mean_zero {
        parts.push("mz");
    }
    if c.real_valued {
        parts.push("rv");
    }
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(",")
    }
}

/// Writes `n re im` rows under `# specfield v1 N=<N> flags=<mz,rv>`.
pub fn write_field<W: Write>(field: &SpectralField, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{MAGIC} N={} flags={}",
        field.max_mode(),
        flags(field.constraints())
    )?;
    for (n, c) in field.modes() {
        writeln!(out, "{n} {:e} {:e}", c.re, c.im)?;
    }
    Ok(())
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

fn parse_header(line: usize, text: &str) -> Result<(usize, Constraints)> {
    let Some(rest) = text.strip_prefix(MAGIC) else {
        return parse_err(line, format!("expected '{MAGIC}' header"));
    };
    let mut max_mode = None;
    let mut constraints = Constraints::NONE;
    for token in rest.split_whitespace() {
        if let Some(v) = token.strip_prefix("N=") {
            max_mode = Some(
                v.parse::<usize>()
                    .map_err(|e| Error::Parse { line, message: format!("bad N: {e}") })?,
            );
        } else if let Some(v) = token.strip_prefix("flags=") {
            for flag in v.split(',') {
                match flag {
                    "mz" => constraints.mean_zero = true,
                    "rv" => constraints.real_valued = true,
                    "none" | "" => {}
                    other => return parse_err(line, format!("unknown flag '{other}'")),
                }
            }
        } else {
            return parse_err(line, format!("unexpected header token '{token}'"));
        }
    }
    match max_mode {
        Some(n) => Ok((n, constraints)),
        None => parse_err(line, "header is missing N=<max_mode>"),
    }
}

/// Reads a field written by [`write_field`]. Every mode of the band must
/// appear exactly once; declared flags are checked exactly.
pub fn read_field<R: BufRead>(input: R) -> Result<SpectralField> {
    let mut header = None;
    let mut coeffs: Vec<Option<C64>> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let Some((max_mode, _)) = header else {
            let h = parse_header(i + 1, text)?;
            coeffs = vec![None; 2 * h.0 + 1];
            header = Some(h);
            continue;
        };
        if text.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 3 {
            return parse_err(i + 1, "expected three columns: n re im");
        }
        let n: i64 = cols[0]
            .parse()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("bad mode: {e}") })?;
        let mut parts = [0.0; 2];
        for (k, p) in parts.iter_mut().enumerate() {
            *p = cols[k + 1]
                .parse()
                .map_err(|e| Error::Parse { line: i + 1, message: format!("bad value: {e}") })?;
        }
        if n.unsigned_abs() as usize > max_mode {
            return parse_err(i + 1, format!("mode {n} outside band {max_mode}"));
        }
        let slot = &mut coeffs[(n + max_mode as i64) as usize];
        if slot.is_some() {
            return parse_err(i + 1, format!("mode {n} repeated"));
        }
        *slot = Some(C64::new(parts[0], parts[1]));
    }
    let Some((max_mode, constraints)) = header else {
        return parse_err(0, "empty field file");
    };
    let mut values = Vec::with_capacity(coeffs.len());
    for (k, c) in coeffs.into_iter().enumerate() {
        match c {
            Some(v) => values.push(v),
            None => return parse_err(0, format!("mode {} missing", k as i64 - max_mode as i64)),
        }
    }
    SpectralField::from_coeffs(max_mode, values, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, Profile};

    #[test]
    fn round_trip_is_exact() {
        let f = random_field(9, Profile::White, 4, Constraints::REAL_MEAN_ZERO).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# specfield v1 N=9 flags=mz,rv\n"));
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn rejects_missing_and_duplicate_modes() {
        let text = "# specfield v1 N=1 flags=none\n-1 0 0\n0 1 0\n";
        assert!(read_field(text.as_bytes()).is_err());
        let text = "# specfield v1 N=1 flags=none\n-1 0 0\n0 1 0\n0 1 0\n1 0 0\n";
        assert!(read_field(text.as_bytes()).is_err());
        let text = "# specfield v1 N=1 flags=mz\n-1 0 0\n0 1 0\n1 0 0\n";
        assert!(read_field(text.as_bytes()).is_err());
    }
}
