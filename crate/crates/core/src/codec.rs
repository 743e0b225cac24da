//! On-disk formats.
//!
//! Binary embedding file, all integers little-endian:
//!
//! ```text
//! "EMB1" | d: u32 | n: u64 | n*d f32 values, row-major
//! ```
//!
//! CSV: one row per sample, comma-separated decimals; lines starting with
//! `#` are ignored. Label sidecar: one UTF-8 label per line, line `i` for
//! row `i`.

use std::fs;
use std::path::Path;

use crate::embedding::{EmbeddingSet, Labels};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// `.csv` files are CSV, everything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

pub fn decode_embeddings(bytes: &[u8], format: Format) -> Result<EmbeddingSet> {
    match format {
        Format::Binary => decode_binary(bytes),
        Format::Csv => decode_csv(bytes),
    }
}

/// Serialize `set`. The binary format stores `f32`, so values outside the
/// `f32` range do not survive a round trip.
pub fn encode_embeddings(set: &EmbeddingSet, format: Format) -> Vec<u8> {
    match format {
        Format::Binary => encode_binary(set),
        Format::Csv => encode_csv(set),
    }
}

fn decode_binary(bytes: &[u8]) -> Result<EmbeddingSet> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        if bytes.len() < 4 && MAGIC.starts_with(bytes) {
            return Err(Error::TruncatedHeader(bytes.len()));
        }
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedHeader(bytes.len()));
    }
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    let expected = n as u128 * d as u128 * 4;
    if expected != payload.len() as u128 {
        return Err(Error::PayloadLength {
            n,
            d,
            expected,
            actual: payload.len(),
        });
    }
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    EmbeddingSet::new(data, d as usize)
}

fn encode_binary(set: &EmbeddingSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + set.as_slice().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(set.d() as u32).to_le_bytes());
    out.extend_from_slice(&(set.n() as u64).to_le_bytes());
    for &v in set.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn decode_csv(bytes: &[u8]) -> Result<EmbeddingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);

    let mut data = Vec::new();
    let mut d = None;
    let mut record = csv::ByteRecord::new();
    let mut row = 0;
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(Error::Malformed(e.to_string())),
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        let width = *d.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: width,
            });
        }
        for (col, field) in record.iter().enumerate() {
            let text = std::str::from_utf8(field).map_err(|_| Error::Parse {
                line,
                field: col,
                text: String::from_utf8_lossy(field).into_owned(),
            })?;
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                line,
                field: col,
                text: text.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            data.push(v);
        }
        row += 1;
    }
    match d {
        None => Err(Error::EmptySet),
        Some(0) => Err(Error::ZeroDimension),
        Some(d) => EmbeddingSet::new(data, d),
    }
}

fn encode_csv(set: &EmbeddingSet) -> Vec<u8> {
    let mut out = String::new();
    for row in set.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // Display for f64 is the shortest string that parses back exactly
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Parse a label sidecar: one non-empty label per line.
pub fn decode_labels(bytes: &[u8]) -> Result<Labels> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Malformed(format!("label file is not UTF-8: {e}")))?;
    let mut names = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            return Err(Error::EmptyLabel(i + 1));
        }
        names.push(line);
    }
    Ok(Labels::from_names(names))
}

pub fn encode_labels(labels: &Labels) -> Vec<u8> {
    let mut out = String::new();
    for name in labels.names() {
        out.push_str(name);
        out.push('\n');
    }
    out.into_bytes()
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let bytes = fs::read(path)?;
    decode_embeddings(&bytes, Format::from_path(path))
}

pub fn write_embeddings(path: &Path, set: &EmbeddingSet) -> Result<()> {
    fs::write(path, encode_embeddings(set, Format::from_path(path)))?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Labels> {
    decode_labels(&fs::read(path)?)
}

pub fn write_labels(path: &Path, labels: &Labels) -> Result<()> {
    fs::write(path, encode_labels(labels))?;
    Ok(())
}
