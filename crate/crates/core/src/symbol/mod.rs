//! Symbols `sigma(k, x)` on `Z^n x T^n`: expression, built-in and grid-sampled
//! backends, order estimation and ellipticity certification.

mod builtin;
mod classify;
mod expr;
mod grid;
mod io;

use num_complex::Complex;

pub use builtin::Builtin;
pub(crate) use builtin::bessel_weight;
pub use classify::{
    check_ellipticity, estimate_order, s0_decay_diagnostic, DecayProfile, EllipticityReport,
    EntryStatus, OrderEstimate, OrderOptions, S0Report, ShellMinimum, ShellSample, SlopeEntry,
};
pub(crate) use classify::fit_line;
pub use expr::{parse_expr, BinOp, Expr, Func};
pub use grid::GridSymbol;
pub(crate) use grid::resample_box;
pub use io::{GridData, SymbolFile};

use crate::error::{Error, Result};
use crate::lattice::{coefficients_in_box, synthesize_from_box, LatticeWindow, TorusGrid};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum Backend<T: Real> {
    Expr(Expr),
    Builtin(Builtin),
    Grid(GridSymbol<T>),
}

/// A symbol with its dimension and (optional) declared order.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol<T: Real> {
    n: usize,
    order: Option<f64>,
    backend: Backend<T>,
}

impl<T: Real> Symbol<T> {
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("symbol dimension must be positive"));
        }
        Ok(Self {
            n,
            order: None,
            backend: Backend::Expr(parse_expr(text, n)?),
        })
    }

    pub fn from_expr(expr: Expr, n: usize) -> Result<Self> {
        let axis = expr.max_axis();
        if axis > n || n == 0 {
            return Err(Error::VariableOutOfRange {
                name: format!("axis {axis}"),
                axis,
                n,
            });
        }
        Ok(Self {
            n,
            order: None,
            backend: Backend::Expr(expr),
        })
    }

    /// Built-in family; the declared order defaults to the family's natural order.
    pub fn builtin(builtin: Builtin, n: usize) -> Result<Self> {
        let axis = builtin.max_axis();
        if n == 0 || axis > n {
            return Err(Error::VariableOutOfRange {
                name: builtin.name().to_string(),
                axis,
                n,
            });
        }
        if let Builtin::Jump { axis: 0, .. } = builtin {
            return Err(Error::domain("jump axis is 1-based"));
        }
        Ok(Self {
            n,
            order: Some(builtin.natural_order()),
            backend: Backend::Builtin(builtin),
        })
    }

    /// Bessel symbol `(1 + |k|^2)^{s/2}` of declared order `s`.
    pub fn bessel(s: f64, n: usize) -> Self {
        Self::builtin(Builtin::Bessel { s }, n).expect("bessel symbol has no axis")
    }

    /// The constant symbol `c`, of order 0.
    pub fn constant(c: f64, n: usize) -> Self {
        Self {
            n,
            order: Some(0.0),
            backend: Backend::Expr(Expr::Real(c)),
        }
    }

    pub fn from_grid(grid: GridSymbol<T>) -> Self {
        Self {
            n: grid.window().dim(),
            order: None,
            backend: Backend::Grid(grid),
        }
    }

    pub fn with_order(mut self, order: f64) -> Self {
        self.order = Some(order);
        self
    }

    pub fn with_optional_order(mut self, order: Option<f64>) -> Self {
        self.order = order;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn declared_order(&self) -> Option<f64> {
        self.order
    }

    pub fn backend(&self) -> &Backend<T> {
        &self.backend
    }

    pub fn as_grid(&self) -> Option<&GridSymbol<T>> {
        match &self.backend {
            Backend::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// True when `sigma(k, x)` does not depend on `x` (a Fourier multiplier).
    pub fn is_x_independent(&self) -> bool {
        match &self.backend {
            Backend::Expr(e) => !e.uses_x(),
            Backend::Builtin(b) => b.is_x_independent(),
            Backend::Grid(_) => false,
        }
    }

    /// Lattice points at which the symbol is defined without truncation effects.
    pub fn defined_at(&self, k: &[i64]) -> bool {
        match &self.backend {
            Backend::Grid(g) => g.window().contains(k),
            _ => true,
        }
    }

    /// `sigma(k, x)`. Grid-backed symbols refuse points outside their window.
    pub fn eval(&self, k: &[i64], x: &[T]) -> Result<Complex<T>> {
        if k.len() != self.n || x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: if k.len() != self.n { k.len() } else { x.len() },
            });
        }
        match &self.backend {
            Backend::Grid(g) => g.eval(k, x),
            _ => {
                let reduced: Vec<T> = x.iter().map(|&t| t - t.floor()).collect();
                Ok(self.eval_analytic(k, &reduced))
            }
        }
    }

    /// Evaluates at the grid node with lifted integer coordinates `node`, i.e. at
    /// `x_j = (node_j mod M) / M`. Shifting a coordinate by `M` moves `x` by one
    /// period and gives bit-identical values, which float shifts `x + 1` cannot.
    pub fn eval_at_node(&self, k: &[i64], grid: &TorusGrid, node: &[i64]) -> Result<Complex<T>> {
        grid.check_dim(self.n)?;
        let m = grid.points_per_axis() as i64;
        let mf = T::from_i64(m).unwrap();
        let x: Vec<T> = node.iter().map(|&j| T::from_i64(j.rem_euclid(m)).unwrap() / mf).collect();
        self.eval(k, &x)
    }

    fn eval_analytic(&self, k: &[i64], x: &[T]) -> Complex<T> {
        match &self.backend {
            Backend::Expr(e) => e.eval(k, x),
            Backend::Builtin(b) => b.eval(k, x),
            Backend::Grid(_) => unreachable!("grid symbols are not analytic"),
        }
    }

    /// Multiplier value for x-independent symbols.
    pub(crate) fn multiplier(&self, k: &[i64]) -> Complex<T> {
        let zeros = vec![T::zero(); self.n];
        self.eval_analytic(k, &zeros)
    }

    /// `sigma(k, .)` at every node of `grid`; `nodes` are the flattened node
    /// coordinates of that grid.
    pub(crate) fn sample_row_with(
        &self,
        k: &[i64],
        grid: &TorusGrid,
        nodes: &[T],
    ) -> Result<Vec<Complex<T>>> {
        match &self.backend {
            Backend::Grid(g) => {
                let row = g.row_index(k)?;
                if g.grid() == grid {
                    Ok(g.row(row).to_vec())
                } else {
                    let coeffs = g.row_coefficients(row);
                    Ok(resample_box(&coeffs, g.row_band(row), g.freq_width(), grid))
                }
            }
            _ => {
                if self.is_x_independent() {
                    return Ok(vec![self.multiplier(k); grid.len()]);
                }
                Ok(nodes
                    .chunks(self.n)
                    .map(|x| self.eval_analytic(k, x))
                    .collect())
            }
        }
    }

    pub fn sample_row(&self, k: &[i64], grid: &TorusGrid) -> Result<Vec<Complex<T>>> {
        if k.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: k.len(),
            });
        }
        grid.check_dim(self.n)?;
        self.sample_row_with(k, grid, &grid.nodes::<T>())
    }

    /// Samples on a window and grid as a grid-backed symbol.
    pub fn to_grid(&self, window: &LatticeWindow, grid: &TorusGrid) -> Result<GridSymbol<T>> {
        window.check_dim(self.n)?;
        grid.check_resolves(window)?;
        let nodes = grid.nodes::<T>();
        let mut values = Vec::with_capacity(window.len() * grid.len());
        for k in window.points() {
            values.extend(self.sample_row_with(&k, grid, &nodes)?);
        }
        GridSymbol::new(window.clone(), grid.clone(), values)
    }

    /// `D_x^{(beta)} sigma(k, .)` at the nodes of `grid`, computed spectrally with
    /// `D = (2 pi i)^{-1} d/dx` and `D^{(l)} = prod_{m<l} (D - m)`.
    pub(crate) fn x_derivative_row(
        &self,
        k: &[i64],
        beta: &[usize],
        grid: &TorusGrid,
        nodes: &[T],
    ) -> Result<Vec<Complex<T>>> {
        let samples = self.sample_row_with(k, grid, nodes)?;
        if beta.iter().all(|&b| b == 0) {
            return Ok(samples);
        }
        if self.is_x_independent() {
            return Ok(vec![Complex::new(T::zero(), T::zero()); grid.len()]);
        }
        let m = grid.points_per_axis();
        let (lo, width) = match &self.backend {
            Backend::Grid(g) if g.grid() == grid => {
                let row = g.row_index(k)?;
                (g.row_band(row).to_vec(), g.freq_width())
            }
            _ => (vec![-((m / 2) as i64); self.n], m),
        };
        let mut coeffs = coefficients_in_box(&samples, grid, &lo, width);
        // drop roundoff-level coefficients before they are amplified by |xi|^beta
        let scale = coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let cutoff = scale * T::lit(1e-14);
        for c in coeffs.iter_mut() {
            if c.norm() <= cutoff {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        Ok(synthesize_from_box(&coeffs, grid, &lo, width, |axis, xi| {
            falling_factorial(T::from_i64(xi).unwrap(), beta[axis])
        }))
    }
}

/// `prod_{m=0}^{l-1} (xi - m)`.
pub(crate) fn falling_factorial<T: Real>(xi: T, l: usize) -> T {
    (0..l).fold(T::one(), |acc, m| acc * (xi - T::from_usize(m).unwrap()))
}

/// Parses an expression symbol in `n` variables.
pub fn parse_symbol<T: Real>(text: &str, n: usize) -> Result<Symbol<T>> {
    Symbol::parse(text, n)
}

pub fn eval_symbol<T: Real>(sigma: &Symbol<T>, k: &[i64], x: &[T]) -> Result<Complex<T>> {
    sigma.eval(k, x)
}

pub fn bessel_symbol<T: Real>(s: f64, n: usize) -> Symbol<T> {
    Symbol::bessel(s, n)
}

/// A symbol in the toroidal role, `tau(x, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToroidalSymbol<T: Real> {
    lattice: Symbol<T>,
}

impl<T: Real> ToroidalSymbol<T> {
    /// `tau(x, k) = conj(sigma(-k, x))`.
    pub fn eval(&self, x: &[T], k: &[i64]) -> Result<Complex<T>> {
        let neg: Vec<i64> = k.iter().map(|&kj| -kj).collect();
        Ok(self.lattice.eval(&neg, x)?.conj())
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn declared_order(&self) -> Option<f64> {
        self.lattice.declared_order()
    }

    /// The lattice symbol this toroidal symbol was built from.
    pub fn lattice_symbol(&self) -> &Symbol<T> {
        &self.lattice
    }
}

/// The toroidal symbol attached to `sigma` by lattice/torus duality. Windows are
/// centred cubes, so grid-backed symbols are always defined at `-k`.
pub fn dual_toroidal_symbol<T: Real>(sigma: &Symbol<T>) -> Result<ToroidalSymbol<T>> {
    Ok(ToroidalSymbol {
        lattice: sigma.clone(),
    })
}
