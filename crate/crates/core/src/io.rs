//! Matrix file formats.
//!
//! Two formats, auto-detected on load:
//! - headerless CSV of reals, one row per line;
//! - binary: magic `LPCM1`, then `rows` and `cols` as 8-byte little-endian
//!   unsigned integers, then row-major 8-byte little-endian IEEE-754 doubles.

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;
use std::io::{Read, Write};
use std::path::Path;

pub const BINARY_MAGIC: &[u8; 5] = b"LPCM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "bin" => Ok(MatrixFormat::Bin),
            other => Err(Error::invalid(format!("unknown format {other:?}, expected csv or bin"))),
        }
    }
}

fn parse_err(path: &Path, location: String, message: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        location,
        message,
    }
}

/// Loads a matrix, sniffing the binary magic first. An empty file yields a
/// `0×0` matrix (callers may warn).
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.is_empty() {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    if bytes.len() >= 5 && &bytes[..5] == BINARY_MAGIC {
        load_binary(path, &bytes)
    } else {
        load_csv(path, &bytes)
    }
}

fn load_binary(path: &Path, bytes: &[u8]) -> Result<DenseMatrix> {
    let header = 5 + 16;
    if bytes.len() < header {
        return Err(parse_err(
            path,
            format!("offset {}", bytes.len()),
            "truncated binary header".into(),
        ));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap()) as usize;
    let need = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| parse_err(path, "offset 5".into(), "dimension overflow".into()))?;
    if bytes.len() != header + need {
        return Err(parse_err(
            path,
            format!("offset {}", bytes.len().min(header + need)),
            format!("expected {} payload bytes, found {}", need, bytes.len() - header),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, chunk) in bytes[header..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(parse_err(
                path,
                format!("offset {}", header + idx * 8),
                format!("non-finite entry {v}"),
            ));
        }
        data.push(v);
    }
    DenseMatrix::new(rows, cols, data)
        .map_err(|e| parse_err(path, "payload".into(), e.to_string()))
}

fn load_csv(path: &Path, bytes: &[u8]) -> Result<DenseMatrix> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err(path, format!("byte {}", e.valid_up_to()), "not valid UTF-8".into()))?;
    let mut data = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for (fieldno, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err(
                    path,
                    format!("line {}, field {}", lineno + 1, fieldno + 1),
                    format!("cannot parse {field:?} as a real"),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    format!("line {}, field {}", lineno + 1, fieldno + 1),
                    format!("non-finite entry {v}"),
                ));
            }
            data.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(parse_err(
                    path,
                    format!("line {}", lineno + 1),
                    format!("expected {c} fields, found {count}"),
                ));
            }
            _ => {}
        }
        rows += 1;
    }
    DenseMatrix::new(rows, cols.unwrap_or(0), data)
        .map_err(|e| parse_err(path, "content".into(), e.to_string()))
}

pub fn save_matrix(path: impl AsRef<Path>, m: &DenseMatrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => save_csv(path, m),
        MatrixFormat::Bin => save_binary(path, m),
    }
}

fn save_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // Shortest round-trip representation keeps reloads bit-exact.
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn save_binary(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(BINARY_MAGIC)?;
    f.write_all(&(m.rows() as u64).to_le_bytes())?;
    f.write_all(&(m.cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data().len() * 8);
    for v in m.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}
