use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{coefficients_in_box, LatticeWindow, TorusGrid};
use crate::scalar::{root_of_unity, Real};

/// Samples `sigma(k, x_j)` for every window point `k` and grid node `x_j`.
///
/// Each row is interpreted as a trigonometric polynomial whose frequencies lie in
/// a box `lo(k) + [0, width)^n`; the box is what off-grid evaluation and spectral
/// x-derivatives use. Sampled symbols use the centred box of width `M`; extracted
/// symbols use `l - k` for `l` in the window.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSymbol<T: Real> {
    window: LatticeWindow,
    grid: TorusGrid,
    values: Vec<Complex<T>>,
    freq_lo: Vec<i64>,
    freq_width: usize,
    interior_margin: usize,
}

impl<T: Real> GridSymbol<T> {
    /// Row-major samples (row `k` in window order, then node order) with the centred
    /// frequency box.
    pub fn new(window: LatticeWindow, grid: TorusGrid, values: Vec<Complex<T>>) -> Result<Self> {
        let m = grid.points_per_axis();
        let lo = -((m / 2) as i64);
        let freq_lo = vec![lo; window.len() * window.dim()];
        Self::with_band(window, grid, values, freq_lo, m)
    }

    pub fn with_band(
        window: LatticeWindow,
        grid: TorusGrid,
        values: Vec<Complex<T>>,
        freq_lo: Vec<i64>,
        freq_width: usize,
    ) -> Result<Self> {
        window.check_dim(grid.dim())?;
        if values.len() != window.len() * grid.len() {
            return Err(Error::domain(format!(
                "grid symbol needs {} samples, got {}",
                window.len() * grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("grid symbol sample".into()));
        }
        if freq_lo.len() != window.len() * window.dim() {
            return Err(Error::domain("frequency offsets must have one entry per row and axis"));
        }
        if freq_width == 0 || freq_width > grid.points_per_axis() {
            return Err(Error::domain(format!(
                "frequency box width {freq_width} must lie in 1..={}",
                grid.points_per_axis()
            )));
        }
        let interior_margin = window.default_margin();
        Ok(Self {
            window,
            grid,
            values,
            freq_lo,
            freq_width,
            interior_margin,
        })
    }

    /// Samples `f(k, x)` at every window point and node.
    pub fn from_fn(
        window: LatticeWindow,
        grid: TorusGrid,
        mut f: impl FnMut(&[i64], &[T]) -> Complex<T>,
    ) -> Result<Self> {
        let nodes = grid.nodes::<T>();
        let n = grid.dim();
        let mut values = Vec::with_capacity(window.len() * grid.len());
        for k in window.points() {
            for x in nodes.chunks(n) {
                values.push(f(&k, x));
            }
        }
        Self::new(window, grid, values)
    }

    pub fn with_interior_margin(mut self, margin: usize) -> Self {
        self.interior_margin = margin;
        self
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn freq_lo(&self) -> &[i64] {
        &self.freq_lo
    }

    pub fn freq_width(&self) -> usize {
        self.freq_width
    }

    /// Layers next to the window boundary whose values are contaminated by truncation.
    pub fn interior_margin(&self) -> usize {
        self.interior_margin
    }

    pub fn is_interior(&self, k: &[i64]) -> bool {
        self.window.is_interior(k, self.interior_margin)
    }

    pub fn row(&self, index: usize) -> &[Complex<T>] {
        let len = self.grid.len();
        &self.values[index * len..(index + 1) * len]
    }

    pub fn row_band(&self, index: usize) -> &[i64] {
        let n = self.window.dim();
        &self.freq_lo[index * n..(index + 1) * n]
    }

    pub(crate) fn row_index(&self, k: &[i64]) -> Result<usize> {
        self.window.index_of(k).ok_or_else(|| Error::OutOfWindow {
            point: k.to_vec(),
            half_width: self.window.half_width(),
        })
    }

    /// Fourier coefficients of row `index` on its frequency box.
    pub fn row_coefficients(&self, index: usize) -> Vec<Complex<T>> {
        coefficients_in_box(self.row(index), &self.grid, self.row_band(index), self.freq_width)
    }

    /// Value at `(k, x)`: exact at nodes (after reducing `x` mod 1), trigonometric
    /// interpolation elsewhere.
    pub fn eval(&self, k: &[i64], x: &[T]) -> Result<Complex<T>> {
        let row = self.row_index(k)?;
        if let Some(node) = self.grid.node_at(x) {
            return Ok(self.row(row)[node]);
        }
        let coeffs = self.row_coefficients(row);
        Ok(evaluate_box(&coeffs, self.row_band(row), self.freq_width, x))
    }
}

/// `sum_xi c(xi) e^{2 pi i xi.x}` over a box of frequencies.
pub(crate) fn evaluate_box<T: Real>(
    coeffs: &[Complex<T>],
    lo: &[i64],
    width: usize,
    x: &[T],
) -> Complex<T> {
    let n = lo.len();
    let per_axis: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| {
            (0..width)
                .map(|q| {
                    let xi = T::from_i64(lo[j] + q as i64).unwrap();
                    let t = xi * (x[j] - x[j].floor());
                    let angle = T::TAU() * t;
                    Complex::new(angle.cos(), angle.sin())
                })
                .collect()
        })
        .collect();
    let mut total = Complex::new(T::zero(), T::zero());
    let mut idx = vec![0usize; n];
    for c in coeffs {
        let phase = idx
            .iter()
            .enumerate()
            .fold(Complex::new(T::one(), T::zero()), |acc, (j, &q)| acc * per_axis[j][q]);
        total += *c * phase;
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < width {
                break;
            }
            idx[j] = 0;
        }
    }
    total
}

/// Resamples a trigonometric polynomial given on a box onto another grid.
pub(crate) fn resample_box<T: Real>(
    coeffs: &[Complex<T>],
    lo: &[i64],
    width: usize,
    target: &TorusGrid,
) -> Vec<Complex<T>> {
    // exact twiddles when the target grid has rational nodes j/M
    let m = target.points_per_axis();
    let n = lo.len();
    let mut out = Vec::with_capacity(target.len());
    let mut node = vec![0usize; n];
    for i in 0..target.len() {
        target.node_index_into(i, &mut node);
        let mut total = Complex::new(T::zero(), T::zero());
        let mut idx = vec![0usize; n];
        for c in coeffs {
            let phase = (0..n).fold(Complex::new(T::one(), T::zero()), |acc, j| {
                let xi = lo[j] + idx[j] as i64;
                acc * root_of_unity::<T>(xi * node[j] as i64, m)
            });
            total += *c * phase;
            for j in (0..n).rev() {
                idx[j] += 1;
                if idx[j] < width {
                    break;
                }
                idx[j] = 0;
            }
        }
        out.push(total);
    }
    out
}
