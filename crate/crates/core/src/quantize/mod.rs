//! Quantization of symbols into operators on a finite lattice window.
//!
//! `(T_sigma f)(k) = int e^{2 pi i k.x} sigma(k,x) f^(x) dx`, realized with the exact
//! grid quadrature. Matrix entries are `A(k,l) = M^{-n} sum_x e^{2 pi i (k-l).x} sigma(k,x)`,
//! i.e. row `k` holds the Fourier coefficients of `sigma(k, .)` at frequencies `l - k`.

mod io;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    coefficients_in_box, forward_dft, synthesize_from_box, LatticeSequence, LatticeWindow, TorusGrid,
};
use crate::scalar::{adjoint, matmul, matvec, root_of_unity, spectral_norm, CMatrix, Real};
use crate::symbol::{dual_toroidal_symbol, GridSymbol, Symbol, ToroidalSymbol};

/// Dense matrix of an operator restricted to a window; rows and columns follow
/// the window's lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    window: LatticeWindow,
    grid: TorusGrid,
    entries: CMatrix<T>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(window: LatticeWindow, grid: TorusGrid, entries: CMatrix<T>) -> Result<Self> {
        grid.check_resolves(&window)?;
        let card = window.len();
        if entries.nrows() != card || entries.ncols() != card {
            return Err(Error::domain(format!(
                "operator matrix must be {card}x{card}, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator matrix entry".into()));
        }
        Ok(Self {
            window,
            grid,
            entries,
        })
    }

    pub fn identity(window: LatticeWindow, grid: TorusGrid) -> Result<Self> {
        let card = window.len();
        Self::new(window, grid, CMatrix::identity(card, card))
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    /// Entry `(k, l)`; zero when either point is outside the window.
    pub fn get(&self, k: &[i64], l: &[i64]) -> Complex<T> {
        match (self.window.index_of(k), self.window.index_of(l)) {
            (Some(i), Some(j)) => self.entries[(i, j)],
            _ => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn apply(&self, f: &LatticeSequence<T>) -> Result<LatticeSequence<T>> {
        if f.window() != &self.window {
            return Err(Error::domain("sequence window differs from the operator window"));
        }
        LatticeSequence::new(self.window.clone(), matvec(&self.entries, f.values()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.window != other.window || self.grid != other.grid {
            return Err(Error::domain("operators live on different windows or grids"));
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            window: self.window.clone(),
            grid: self.grid.clone(),
            entries: matmul(&self.entries, &other.entries),
        })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_compatible(other)?;
        let entries = self.entries.zip_map(&other.entries, |x, y| x * a + y * b);
        Ok(Self {
            window: self.window.clone(),
            grid: self.grid.clone(),
            entries,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            window: self.window.clone(),
            grid: self.grid.clone(),
            entries: adjoint(&self.entries),
        }
    }

    /// `self - I`.
    pub fn minus_identity(&self) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..entries.nrows() {
            entries[(i, i)] -= Complex::new(T::one(), T::zero());
        }
        Self {
            window: self.window.clone(),
            grid: self.grid.clone(),
            entries,
        }
    }

    pub fn spectral_norm(&self) -> T {
        spectral_norm(&self.entries)
    }

    /// Largest entry modulus over rows `k` with `keep(k)`.
    pub fn max_abs_on_rows(&self, keep: impl Fn(&[i64]) -> bool) -> T {
        let mut k = vec![0; self.window.dim()];
        let mut worst = T::zero();
        for i in 0..self.entries.nrows() {
            self.window.point_into(i, &mut k);
            if keep(&k) {
                for j in 0..self.entries.ncols() {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }
}

fn check_setup<T: Real>(sigma: &Symbol<T>, window: &LatticeWindow, grid: &TorusGrid) -> Result<()> {
    window.check_dim(sigma.dim())?;
    grid.check_resolves(window)
}

/// `e^{2 pi i k.x_j}` at every node `j`.
fn character_row<T: Real>(k: &[i64], grid: &TorusGrid) -> Vec<Complex<T>> {
    let m = grid.points_per_axis();
    let mut node = vec![0usize; grid.dim()];
    (0..grid.len())
        .map(|i| {
            grid.node_index_into(i, &mut node);
            let p: i64 = k.iter().zip(&node).map(|(&kj, &xj)| kj * xj as i64).sum();
            root_of_unity(p, m)
        })
        .collect()
}

/// `T_sigma f` on the window of `f`.
pub fn apply<T: Real>(
    sigma: &Symbol<T>,
    f: &LatticeSequence<T>,
    grid: &TorusGrid,
) -> Result<LatticeSequence<T>> {
    let window = f.window();
    check_setup(sigma, window, grid)?;
    if sigma.is_x_independent() {
        return Ok(f.map(|k, v| sigma.multiplier(k) * v));
    }
    let f_hat = forward_dft(f, grid)?;
    let nodes = grid.nodes::<T>();
    let weight = grid.weight::<T>();
    let values = (0..window.len())
        .into_par_iter()
        .map(|i| {
            let k = window.point(i);
            let row = sigma.sample_row_with(&k, grid, &nodes)?;
            let phase = character_row::<T>(&k, grid);
            let sum = row
                .iter()
                .zip(&phase)
                .zip(f_hat.values())
                .fold(Complex::new(T::zero(), T::zero()), |acc, ((s, e), fh)| acc + *e * *s * *fh);
            Ok(sum * weight)
        })
        .collect::<Result<Vec<_>>>()?;
    LatticeSequence::new(window.clone(), values)
}

/// Lower corner `-N - k` of the frequencies `l - k`, `l` in the window.
fn row_band(window: &LatticeWindow, k: &[i64]) -> Vec<i64> {
    let half = window.half_width() as i64;
    k.iter().map(|&kj| -half - kj).collect()
}

/// Assembles a matrix from per-row symbol samples at the grid nodes.
pub(crate) fn assemble_from_rows<T: Real>(
    window: &LatticeWindow,
    grid: &TorusGrid,
    rows: impl Fn(&[i64]) -> Result<Vec<Complex<T>>> + Sync,
) -> Result<OperatorMatrix<T>> {
    grid.check_resolves(window)?;
    let card = window.len();
    let side = window.side();
    let computed: Vec<Vec<Complex<T>>> = (0..card)
        .into_par_iter()
        .map(|i| {
            let k = window.point(i);
            let samples = rows(&k)?;
            Ok(coefficients_in_box(&samples, grid, &row_band(window, &k), side))
        })
        .collect::<Result<_>>()?;
    let entries = CMatrix::from_fn(card, card, |i, j| computed[i][j]);
    OperatorMatrix::new(window.clone(), grid.clone(), entries)
}

/// Dense matrix of `T_sigma` on the window.
pub fn assemble_matrix<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<OperatorMatrix<T>> {
    check_setup(sigma, window, grid)?;
    if sigma.is_x_independent() {
        let card = window.len();
        let mut entries = CMatrix::zeros(card, card);
        for (i, k) in window.points().enumerate() {
            entries[(i, i)] = sigma.multiplier(&k);
        }
        return OperatorMatrix::new(window.clone(), grid.clone(), entries);
    }
    let nodes = grid.nodes::<T>();
    assemble_from_rows(window, grid, |k| sigma.sample_row_with(k, grid, &nodes))
}

/// Recovers `sigma_A(k, x) = sum_l A(k,l) e^{2 pi i (l-k).x}` as a grid symbol.
pub fn extract_symbol<T: Real>(a: &OperatorMatrix<T>) -> Result<Symbol<T>> {
    let window = a.window();
    let grid = a.grid();
    let card = window.len();
    let side = window.side();
    let rows: Vec<(Vec<i64>, Vec<Complex<T>>)> = (0..card)
        .into_par_iter()
        .map(|i| {
            let k = window.point(i);
            let band = row_band(window, &k);
            let row: Vec<Complex<T>> = (0..card).map(|j| a.entries()[(i, j)]).collect();
            let samples = synthesize_from_box(&row, grid, &band, side, |_, _| T::one());
            (band, samples)
        })
        .collect();
    let mut values = Vec::with_capacity(card * grid.len());
    let mut freq_lo = Vec::with_capacity(card * window.dim());
    for (band, samples) in rows {
        freq_lo.extend(band);
        values.extend(samples);
    }
    let g = GridSymbol::with_band(window.clone(), grid.clone(), values, freq_lo, side)?;
    Ok(Symbol::from_grid(g))
}

fn sum_orders(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? + b?)
}

/// Symbol of `T_sigma T_tau` on the window (finite-section product, then extraction).
pub fn compose<T: Real>(
    sigma: &Symbol<T>,
    tau: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<Symbol<T>> {
    if sigma.dim() != tau.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: tau.dim(),
        });
    }
    let a = assemble_matrix(sigma, window, grid)?;
    let b = assemble_matrix(tau, window, grid)?;
    Ok(extract_symbol(&a.compose(&b)?)?
        .with_optional_order(sum_orders(sigma.declared_order(), tau.declared_order())))
}

/// Symbol of the formal adjoint, from the conjugate transpose of the finite section.
pub fn adjoint_symbol<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<Symbol<T>> {
    let a = assemble_matrix(sigma, window, grid)?;
    Ok(extract_symbol(&a.adjoint())?.with_optional_order(sigma.declared_order()))
}

/// Forward transform as a matrix, grid nodes by window points.
pub fn dft_matrix<T: Real>(window: &LatticeWindow, grid: &TorusGrid) -> CMatrix<T> {
    let points: Vec<Vec<i64>> = window.points().collect();
    let m = grid.points_per_axis();
    let mut node = vec![0usize; grid.dim()];
    let mut out = CMatrix::zeros(grid.len(), window.len());
    for r in 0..grid.len() {
        grid.node_index_into(r, &mut node);
        for (c, k) in points.iter().enumerate() {
            let p: i64 = k.iter().zip(&node).map(|(&kj, &xj)| kj * xj as i64).sum();
            out[(r, c)] = root_of_unity(-p, m);
        }
    }
    out
}

/// Inverse transform as a matrix, window points by grid nodes.
pub fn inverse_dft_matrix<T: Real>(window: &LatticeWindow, grid: &TorusGrid) -> CMatrix<T> {
    let w = grid.weight::<T>();
    adjoint(&dft_matrix::<T>(window, grid)).map(|z| z * w)
}

/// Discretized toroidal quantization of `tau(x, k)`, `k` over the window:
/// `T(x, y) = M^{-n} sum_k e^{2 pi i k.(x-y)} tau(x, k)`.
pub fn toroidal_matrix<T: Real>(
    tau: &ToroidalSymbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<CMatrix<T>> {
    window.check_dim(tau.dim())?;
    grid.check_resolves(window)?;
    let nodes = grid.nodes::<T>();
    let n = grid.dim();
    let points: Vec<Vec<i64>> = window.points().collect();
    let f = dft_matrix::<T>(window, grid);
    let w = grid.weight::<T>();
    let rows: Vec<Vec<Complex<T>>> = (0..grid.len())
        .into_par_iter()
        .map(|r| {
            let x = &nodes[r * n..(r + 1) * n];
            // c(k) = tau(x, k) e^{2 pi i k.x}; row = sum_k c(k) e^{-2 pi i k.y} = (F c)(y)
            let coeffs = points
                .iter()
                .enumerate()
                .map(|(c, k)| Ok(tau.eval(x, k)? * f[(r, c)].conj()))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..grid.len())
                .map(|y| {
                    coeffs
                        .iter()
                        .enumerate()
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (c, v)| acc + f[(y, c)] * *v)
                        * w
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(grid.len(), grid.len(), |i, j| rows[i][j]))
}

/// The lattice operator rebuilt from the toroidal side: `F^{-1} T_tau^H F` with
/// `tau(x, k) = conj(sigma(-k, x))`.
pub fn duality_matrix<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<OperatorMatrix<T>> {
    check_setup(sigma, window, grid)?;
    let tau = dual_toroidal_symbol(sigma)?;
    let t = toroidal_matrix(&tau, window, grid)?;
    let f = dft_matrix::<T>(window, grid);
    let f_inv = inverse_dft_matrix::<T>(window, grid);
    let entries = matmul(&matmul(&f_inv, &adjoint(&t)), &f);
    OperatorMatrix::new(window.clone(), grid.clone(), entries)
}
