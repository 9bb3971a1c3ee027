//! Text and binary spectrum formats.
//!
//! CSV: header `index,lambda,mu`, one row per eigenvalue; lines starting with
//! `#` are comments. Binary eigenvectors: `n` and `n` as u64 little endian,
//! then `n * n` little-endian f64 with eigenvector `i` in row `i`.

use std::io::{BufRead, Read, Write};

use super::{SpectralError, Spectrum};

pub fn write_spectrum_csv<W: Write>(s: &Spectrum, mut out: W) -> Result<(), SpectralError> {
    writeln!(out, "index,lambda,mu")?;
    let d = s.d() as f64;
    for (i, &l) in s.eigenvalues().iter().enumerate() {
        writeln!(out, "{i},{l},{}", d - l)?;
    }
    Ok(())
}

/// Returns the eigenvalues in file order.
pub fn read_spectrum_csv<R: BufRead>(input: R) -> Result<Vec<f64>, SpectralError> {
    let mut values = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !seen_header {
            if t != "index,lambda,mu" {
                return Err(SpectralError::Format(format!(
                    "line {}: unexpected header {t:?}",
                    lineno + 1
                )));
            }
            seen_header = true;
            continue;
        }
        let bad = || SpectralError::Format(format!("line {}: malformed row {t:?}", lineno + 1));
        let mut cols = t.split(',');
        let idx: usize = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let lambda: f64 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        if idx != values.len() || cols.next().is_none() {
            return Err(bad());
        }
        values.push(lambda);
    }
    Ok(values)
}

pub fn write_eigenvectors<W: Write>(s: &Spectrum, mut out: W) -> Result<(), SpectralError> {
    let n = s.n() as u64;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&n.to_le_bytes())?;
    let mut buf = Vec::with_capacity(s.n() * 8);
    for i in 0..s.n() {
        buf.clear();
        for x in s.vector(i) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Returns `(n, row-major entries)`.
pub fn read_eigenvectors<R: Read>(mut input: R) -> Result<(usize, Vec<f64>), SpectralError> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    let rows = u64::from_le_bytes(header[..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(header[8..].try_into().unwrap()) as usize;
    if rows != cols {
        return Err(SpectralError::Format(format!(
            "eigenvector dump is {rows}x{cols}, expected square"
        )));
    }
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 8 {
        return Err(SpectralError::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            rows * cols * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, data))
}
