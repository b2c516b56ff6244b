//! Matrix file formats.
//!
//! CSV: one row per line, comma-separated decimal floats, with an optional
//! first line `# n=<n> d=<d>`. Ragged rows are rejected.
//!
//! Binary (`.m2qb`): magic `M2QB`, then little-endian u32 version (= 1),
//! u64 n, u64 d, followed by n·d f64 entries, row-major, little-endian.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use std::io::Write;
use std::path::Path;

pub const BINARY_MAGIC: &[u8; 4] = b"M2QB";
pub const BINARY_VERSION: u32 = 1;

/// Largest entry count accepted from a binary header (guards corrupt files).
const MAX_ENTRIES: u64 = 1 << 30;

pub fn write_csv(path: &Path, x: &DataMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# n={} d={}", x.n(), x.d())?;
    for row in x.rows() {
        let mut first = true;
        for v in row {
            if !first {
                write!(out, ",")?;
            }
            // `{}` on f64 prints the shortest string that round-trips.
            write!(out, "{v}")?;
            first = false;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub(crate) fn parse_csv(text: &str) -> Result<DataMatrix> {
    let mut declared: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if lineno == 0 {
                declared = Some(parse_header(rest)?);
                continue;
            }
            return Err(Error::Parse(format!("unexpected comment on line {}", lineno + 1)));
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {:?} on line {}", tok.trim(), lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite entry on line {}", lineno + 1)));
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "ragged row on line {}: {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    if let Some((n, d)) = declared {
        if n != rows.len() || d != rows[0].len() {
            return Err(Error::Parse(format!(
                "header says {n}x{d} but file has {}x{}",
                rows.len(),
                rows[0].len()
            )));
        }
    }
    DataMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_header(rest: &str) -> Result<(usize, usize)> {
    let mut n = None;
    let mut d = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse().map_err(|_| Error::Parse(format!("bad header field {tok:?}")))?);
        } else if let Some(v) = tok.strip_prefix("d=") {
            d = Some(v.parse().map_err(|_| Error::Parse(format!("bad header field {tok:?}")))?);
        } else {
            return Err(Error::Parse(format!("unknown header field {tok:?}")));
        }
    }
    match (n, d) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(Error::Parse("header must declare n= and d=".into())),
    }
}

pub fn write_binary(path: &Path, x: &DataMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(x.n() as u64).to_le_bytes())?;
    out.write_all(&(x.d() as u64).to_le_bytes())?;
    for v in x.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<DataMatrix> {
    let bytes = std::fs::read(path)?;
    parse_binary(&bytes)
}

pub(crate) fn parse_binary(bytes: &[u8]) -> Result<DataMatrix> {
    if bytes.len() < 24 || &bytes[0..4] != BINARY_MAGIC {
        return Err(Error::Parse("not an M2QB file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if n == 0 || d == 0 || n.checked_mul(d).map_or(true, |e| e > MAX_ENTRIES) {
        return Err(Error::Parse(format!("implausible dimensions {n}x{d}")));
    }
    let count = (n * d) as usize;
    let expected = 24 + 8 * count;
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "file length {} does not match header ({expected} expected)",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for chunk in bytes[24..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    DataMatrix::from_vec(n as usize, d as usize, data).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads either format, sniffing the binary magic.
pub fn read_matrix(path: &Path) -> Result<DataMatrix> {
    let bytes = std::fs::read(path)?;
    if bytes.len() >= 4 && &bytes[0..4] == BINARY_MAGIC {
        parse_binary(&bytes)
    } else {
        parse_csv(std::str::from_utf8(&bytes).map_err(|_| Error::Parse("matrix file is neither M2QB nor UTF-8 CSV".into()))?)
    }
}
