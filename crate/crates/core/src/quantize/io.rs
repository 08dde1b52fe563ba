//! Operator matrix files: a compact little-endian binary layout and JSON.
//!
//! Binary layout: `b"LPDOMAT1"`, then `u32` n, N, M, then `card^2` pairs of `f64`
//! (re, im) in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::OperatorMatrix;
use crate::error::{Error, Result};
use crate::lattice::{LatticeWindow, TorusGrid};
use crate::scalar::{CMatrix, Real};

const MAGIC: &[u8; 8] = b"LPDOMAT1";

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    window: LatticeWindow,
    grid: TorusGrid,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn format_err(e: Error) -> Error {
    match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Format("operator matrix file is truncated".into())
        }
        Error::Format(_) | Error::Io(_) => e,
        other => Error::Format(other.to_string()),
    }
}

impl<T: Real> OperatorMatrix<T> {
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            self.window.dim(),
            self.window.half_width(),
            self.grid.points_per_axis(),
        ] {
            let v = u32::try_from(v).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
            w.write_all(&v.to_le_bytes())?;
        }
        let card = self.window.len();
        for i in 0..card {
            for j in 0..card {
                let z = self.entries[(i, j)];
                w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
                w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| format_err(e.into()))?;
        if &magic != MAGIC {
            return Err(Error::Format("not an operator matrix file (bad magic)".into()));
        }
        let n = read_u32(&mut r).map_err(format_err)? as usize;
        let half = read_u32(&mut r).map_err(format_err)? as usize;
        let m = read_u32(&mut r).map_err(format_err)? as usize;
        let window = LatticeWindow::new(n, half).map_err(format_err)?;
        let grid = TorusGrid::new(n, m).map_err(format_err)?;
        let card = window.len();
        let mut values = Vec::with_capacity(card * card);
        for _ in 0..card * card {
            let re = read_f64(&mut r).map_err(format_err)?;
            let im = read_f64(&mut r).map_err(format_err)?;
            values.push(Complex::new(T::lit(re), T::lit(im)));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format("trailing bytes after operator matrix".into()));
        }
        Self::new(window, grid, CMatrix::from_row_slice(card, card, &values)).map_err(format_err)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let card = self.window.len();
        let mut entries = Vec::with_capacity(card * card);
        for i in 0..card {
            for j in 0..card {
                let z = self.entries[(i, j)];
                entries.push([z.re.to_f64_lossy(), z.im.to_f64_lossy()]);
            }
        }
        let file = MatrixFile {
            window: self.window.clone(),
            grid: self.grid.clone(),
            entries,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text)?;
        let window = LatticeWindow::new(file.window.dim(), file.window.half_width()).map_err(format_err)?;
        let grid = TorusGrid::new(file.grid.dim(), file.grid.points_per_axis()).map_err(format_err)?;
        let card = window.len();
        if file.entries.len() != card * card {
            return Err(Error::Format(format!(
                "expected {} matrix entries, found {}",
                card * card,
                file.entries.len()
            )));
        }
        let values: Vec<Complex<T>> = file
            .entries
            .iter()
            .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
            .collect();
        Self::new(window, grid, CMatrix::from_row_slice(card, card, &values)).map_err(format_err)
    }

    /// Writes JSON when the extension is `.json`, binary otherwise.
    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "json") {
            std::fs::write(path, self.to_json_string()?)?;
        } else {
            self.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))?;
        }
        Ok(())
    }

    /// Reads either format, detected from the leading bytes.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes.as_slice())
        } else {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::Format("operator matrix file is neither binary nor JSON".into()))?;
            Self::from_json_str(text)
        }
    }
}
