//! Matrix files: binary `MVK1` and plain CSV, detected by magic prefix.
//!
//! `MVK1` is an ASCII header line `MVK1 <rows> <cols>\n` followed by
//! `rows × cols` little-endian binary64 values in row-major order.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MVK1_MAGIC: &[u8] = b"MVK1";

pub fn encode_mvk1(m: &DMatrix<f64>) -> Vec<u8> {
    let header = format!("MVK1 {} {}\n", m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(header.len() + 8 * m.len());
    out.extend_from_slice(header.as_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_mvk1(bytes: &[u8]) -> Result<DMatrix<f64>> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::CorruptHeader("no header line terminator".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::CorruptHeader("header is not ASCII".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let (rows, cols) = match fields.as_slice() {
        ["MVK1", r, c] => (
            r.parse::<usize>().map_err(|_| Error::CorruptHeader(format!("bad row count `{r}`")))?,
            c.parse::<usize>().map_err(|_| Error::CorruptHeader(format!("bad column count `{c}`")))?,
        ),
        _ => return Err(Error::CorruptHeader(format!("unexpected header `{header}`"))),
    };
    let body = &bytes[nl + 1..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|x| x.checked_mul(8))
        .ok_or_else(|| Error::CorruptHeader(format!("dimensions {rows}×{cols} overflow")))?;
    if body.len() != expected {
        return Err(Error::TruncatedData(format!(
            "expected {expected} payload bytes for {rows}×{cols}, found {}",
            body.len()
        )));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    Ok(DMatrix::from_row_iterator(rows, cols, values))
}

pub fn encode_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number `{}`", lineno + 1, c.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::TruncatedData(format!(
                    "line {} has {} values, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::CorruptHeader("empty matrix file".into()));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Decodes either format, choosing by the `MVK1` magic prefix.
pub fn decode_matrix(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.is_empty() {
        return Err(Error::CorruptHeader("empty matrix file".into()));
    }
    if bytes.starts_with(MVK1_MAGIC) {
        return decode_mvk1(bytes);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::CorruptHeader("neither MVK1 nor UTF-8 CSV".into()))?;
    decode_csv(text)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    decode_matrix(&fs::read(path)?)
}

/// Shape of a matrix file; reads only the header for `MVK1`.
pub fn matrix_shape(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    use std::io::{BufRead, BufReader, Read};
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut magic = [0u8; 4];
    let got = reader.read(&mut magic)?;
    if got == 4 && magic == MVK1_MAGIC {
        let mut rest = String::new();
        reader.read_line(&mut rest)?;
        let mut fields = rest.split_whitespace().map(str::parse::<usize>);
        if let (Some(Ok(r)), Some(Ok(c)), None) = (fields.next(), fields.next(), fields.next()) {
            return Ok((r, c));
        }
        return Err(Error::CorruptHeader(format!("unexpected header `MVK1{}`", rest.trim_end())));
    }
    Ok(read_matrix(path)?.shape())
}

/// Writes CSV when the extension is `.csv`, `MVK1` otherwise.
pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        fs::write(path, encode_csv(m))?;
    } else {
        fs::write(path, encode_mvk1(m))?;
    }
    Ok(())
}

/// Labels: one non-negative integer per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| l.parse::<usize>().map_err(|_| Error::Parse(format!("label line {}: `{l}`", i + 1))))
        .collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
