use std::io::{Read, Write};

use num_complex::Complex;
use rand::Rng;

use super::domain::{LatticeWindow, TorusGrid};
use crate::error::{Error, Result};
use crate::scalar::{norm2, Real};

/// A complex sequence on a lattice window, extended by zero outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSequence<T: Real> {
    window: LatticeWindow,
    values: Vec<Complex<T>>,
}

impl<T: Real> LatticeSequence<T> {
    pub fn new(window: LatticeWindow, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::domain(format!(
                "sequence has {} values but the window has {} points",
                values.len(),
                window.len()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn zeros(window: LatticeWindow) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); window.len()];
        Self { window, values }
    }

    /// Kronecker delta at `k`.
    pub fn delta(window: LatticeWindow, k: &[i64]) -> Result<Self> {
        let idx = window.index_of(k).ok_or_else(|| Error::OutOfWindow {
            point: k.to_vec(),
            half_width: window.half_width(),
        })?;
        let mut seq = Self::zeros(window);
        seq.values[idx] = Complex::new(T::one(), T::zero());
        Ok(seq)
    }

    pub fn from_fn(window: LatticeWindow, mut f: impl FnMut(&[i64]) -> Complex<T>) -> Self {
        let mut k = vec![0; window.dim()];
        let values = (0..window.len())
            .map(|i| {
                window.point_into(i, &mut k);
                f(&k)
            })
            .collect();
        Self { window, values }
    }

    /// Random sequence with independent uniform real and imaginary parts in
    /// `[-1, 1]`, supported on points at least `margin` layers inside the window.
    pub fn random<R: Rng + ?Sized>(window: LatticeWindow, margin: usize, rng: &mut R) -> Self {
        Self::from_fn(window.clone(), |k| {
            let re: f64 = rng.gen_range(-1.0..=1.0);
            let im: f64 = rng.gen_range(-1.0..=1.0);
            if window.is_interior(k, margin) {
                Complex::new(T::lit(re), T::lit(im))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Value at `k`, zero outside the window.
    pub fn get(&self, k: &[i64]) -> Complex<T> {
        self.window
            .index_of(k)
            .map(|i| self.values[i])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn set(&mut self, k: &[i64], value: Complex<T>) -> Result<()> {
        let idx = self.window.index_of(k).ok_or_else(|| Error::OutOfWindow {
            point: k.to_vec(),
            half_width: self.window.half_width(),
        })?;
        self.values[idx] = value;
        Ok(())
    }

    pub fn norm_l2(&self) -> T {
        norm2(&self.values)
    }

    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<f, g> = sum conj(f) g` over the window.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_window(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Result<Self> {
        self.check_same_window(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            window: self.window.clone(),
            values,
        })
    }

    pub fn map(&self, mut f: impl FnMut(&[i64], Complex<T>) -> Complex<T>) -> Self {
        let mut k = vec![0; self.window.dim()];
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                self.window.point_into(i, &mut k);
                f(&k, v)
            })
            .collect();
        Self {
            window: self.window.clone(),
            values,
        }
    }

    /// Restriction to (or zero-padded extension onto) another window.
    pub fn resize(&self, window: LatticeWindow) -> Result<Self> {
        self.window.check_dim(window.dim())?;
        Ok(Self::from_fn(window, |k| self.get(k)))
    }

    /// Largest `|f(k) - g(k)|` over points with `keep(k)`.
    pub fn max_abs_diff(&self, other: &Self, keep: impl Fn(&[i64]) -> bool) -> Result<T> {
        self.check_same_window(other)?;
        let mut k = vec![0; self.window.dim()];
        let mut worst = T::zero();
        for i in 0..self.values.len() {
            self.window.point_into(i, &mut k);
            if keep(&k) {
                worst = worst.max((self.values[i] - other.values[i]).norm());
            }
        }
        Ok(worst)
    }

    pub(crate) fn check_same_window(&self, other: &Self) -> Result<()> {
        self.window.check_dim(other.window.dim())?;
        if self.window != other.window {
            return Err(Error::domain("sequences live on different windows"));
        }
        Ok(())
    }

    /// Writes `k1,...,kn,re,im` rows in lexicographic order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.dim();
        let mut header: Vec<String> = (1..=n).map(|j| format!("k{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        let mut k = vec![0; n];
        for (i, v) in self.values.iter().enumerate() {
            self.window.point_into(i, &mut k);
            let mut row: Vec<String> = k.iter().map(|kj| kj.to_string()).collect();
            row.push(format_float(v.re.to_f64_lossy()));
            row.push(format_float(v.im.to_f64_lossy()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV sequence format. Rows may come in any order; points the file
    /// does not mention are zero. Without an explicit window the smallest window
    /// containing every row is used.
    pub fn read_csv<R: Read>(reader: R, window: Option<LatticeWindow>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols.len() < 3 || cols[cols.len() - 2] != "re" || cols[cols.len() - 1] != "im" {
            return Err(Error::Format(
                "sequence header must be k1,...,kn,re,im".into(),
            ));
        }
        let n = cols.len() - 2;
        for (j, name) in cols[..n].iter().enumerate() {
            if *name != format!("k{}", j + 1) {
                return Err(Error::Format(format!(
                    "expected column k{} but found {name}",
                    j + 1
                )));
            }
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != n + 2 {
                return Err(Error::Format(format!(
                    "row has {} fields, expected {}",
                    record.len(),
                    n + 2
                )));
            }
            let k = record
                .iter()
                .take(n)
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|e| Error::Format(format!("bad lattice coordinate {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad value {s:?}: {e}")))
            };
            let re = parse(&record[n])?;
            let im = parse(&record[n + 1])?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::NonFinite(format!("sequence value at {k:?}")));
            }
            rows.push((k, Complex::new(T::lit(re), T::lit(im))));
        }
        let window = match window {
            Some(w) => {
                w.check_dim(n)?;
                w
            }
            None => {
                let half = rows
                    .iter()
                    .flat_map(|(k, _)| k.iter().map(|kj| kj.unsigned_abs() as usize))
                    .max()
                    .unwrap_or(1)
                    .max(1);
                LatticeWindow::new(n, half)?
            }
        };
        let mut seq = Self::zeros(window);
        let mut seen = vec![false; seq.values.len()];
        for (k, v) in rows {
            let idx = seq.window.index_of(&k).ok_or_else(|| Error::OutOfWindow {
                point: k.clone(),
                half_width: seq.window.half_width(),
            })?;
            if seen[idx] {
                return Err(Error::Format(format!("duplicate row for point {k:?}")));
            }
            seen[idx] = true;
            seq.values[idx] = v;
        }
        Ok(seq)
    }
}

/// Shortest round-tripping decimal representation.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// Samples of a function on the torus grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusFunction<T: Real> {
    grid: TorusGrid,
    values: Vec<Complex<T>>,
}

impl<T: Real> TorusFunction<T> {
    pub fn new(grid: TorusGrid, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "function has {} samples but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("torus function sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[T]) -> Complex<T>) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.node::<T>(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: TorusGrid, value: Complex<T>) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Pointwise map, keeping the finiteness invariant.
    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Writes `x1,...,xn,re,im` rows in node order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.grid.dim();
        let mut header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.node::<f64>(i).into_iter().map(format_float).collect();
            row.push(format_float(v.re.to_f64_lossy()));
            row.push(format_float(v.im.to_f64_lossy()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). The file must
    /// cover every node of an `M^n` grid exactly once, in any order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        let n = cols.len().saturating_sub(2);
        let expected: Vec<String> = (1..=n).map(|j| format!("x{j}")).chain(["re".into(), "im".into()]).collect();
        if n == 0 || cols != expected {
            return Err(Error::Format("torus function header must be x1,...,xn,re,im".into()));
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != n + 2 {
                return Err(Error::Format(format!("row has {} fields, expected {}", record.len(), n + 2)));
            }
            let fields = record
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(fields);
        }
        let m = (rows.len() as f64).powf(1.0 / n as f64).round() as usize;
        if m == 0 || m.pow(n as u32) != rows.len() {
            return Err(Error::Format(format!("{} rows do not form an M^{n} grid", rows.len())));
        }
        let grid = TorusGrid::new(n, m)?;
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        let mut seen = vec![false; grid.len()];
        for row in rows {
            let idx = grid
                .node_at(&row[..n])
                .ok_or_else(|| Error::Format(format!("point {:?} is not a node of the {m}-point grid", &row[..n])))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Format(format!("duplicate row for node {:?}", &row[..n])));
            }
            values[idx] = Complex::new(T::lit(row[n]), T::lit(row[n + 1]));
        }
        Self::new(grid, values)
    }
}
