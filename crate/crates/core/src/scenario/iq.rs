//! Raw IQ trace files: interleaved little-endian `f32` pairs `(I, Q)`, no header.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::spectral::ComplexSeries;
use crate::{Error, Result};

/// Reads a raw IQ capture. Sample rate is not stored in the file.
pub fn load_iq_trace(path: impl AsRef<Path>, sample_rate_hz: f64) -> Result<ComplexSeries> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ComplexSeries::new(decode_iq(&bytes)?, sample_rate_hz)
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::MalformedLength {
            len: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(i as f64, q as f64)
        })
        .collect())
}

/// Writes samples as `f32` pairs; values are rounded to single precision.
pub fn write_iq_trace(path: impl AsRef<Path>, samples: &[Complex64]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        w.write_all(&(s.re as f32).to_le_bytes())
            .and_then(|_| w.write_all(&(s.im as f32).to_le_bytes()))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
